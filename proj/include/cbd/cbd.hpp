#ifndef CBD_CBD_HPP
#define CBD_CBD_HPP

#include "cbd/bell.hpp"
#include "cbd/coupling.hpp"
#include "cbd/errors.hpp"
#include "cbd/generators.hpp"
#include "cbd/json_io.hpp"
#include "cbd/lp.hpp"
#include "cbd/oracle.hpp"
#include "cbd/rational.hpp"
#include "cbd/report.hpp"
#include "cbd/system.hpp"

#endif
