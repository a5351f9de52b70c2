#pragma once

#include "algebra.hpp"
#include "catalog.hpp"
#include "collect.hpp"
#include "contact.hpp"
#include "diff.hpp"
#include "eval.hpp"
#include "expr.hpp"
#include "jet.hpp"
#include "parser.hpp"
#include "probe.hpp"
#include "simplify.hpp"
#include "verify.hpp"
