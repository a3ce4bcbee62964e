#pragma once

#include "nmdeg/errors.hpp"
#include "nmdeg/operators.hpp"
#include "nmdeg/rates.hpp"
#include "nmdeg/generators.hpp"
#include "nmdeg/evolution.hpp"
#include "nmdeg/optimize.hpp"
#include "nmdeg/divisibility.hpp"
#include "nmdeg/witnesses.hpp"
#include "nmdeg/bloch.hpp"
