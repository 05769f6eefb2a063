#pragma once

#include "qubosc/model.hpp"
#include "qubosc/integrator.hpp"
#include "qubosc/trotter.hpp"
#include "qubosc/floquet.hpp"
#include "qubosc/perturbation.hpp"
#include "qubosc/polynomial.hpp"
#include "qubosc/laplace.hpp"
#include "qubosc/experiments.hpp"
#include "qubosc/io.hpp"
