#pragma once

#include "errors.hpp"
#include "core_model.hpp"
#include "hyperbolic.hpp"
#include "closed_form.hpp"
#include "banded.hpp"
#include "ode_oracle.hpp"
#include "parallel.hpp"
#include "reynolds_solver.hpp"
#include "postprocess.hpp"
#include "expression.hpp"
#include "config.hpp"
#include "pipeline.hpp"
#include "acceptance.hpp"
