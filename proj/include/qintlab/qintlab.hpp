#pragma once

#include "qintlab/core.hpp"
#include "qintlab/qsim.hpp"
#include "qintlab/grover.hpp"
#include "qintlab/amp_est.hpp"
#include "qintlab/holder.hpp"
#include "qintlab/quadrature.hpp"
#include "qintlab/integrators.hpp"
#include "qintlab/ratelab.hpp"
