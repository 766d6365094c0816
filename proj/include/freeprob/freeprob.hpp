#pragma once

#include "freeprob/algebra.hpp"
#include "freeprob/multilinear.hpp"
#include "freeprob/jet.hpp"
#include "freeprob/transforms.hpp"
#include "freeprob/fock.hpp"
#include "freeprob/json_io.hpp"
#include "freeprob/harness.hpp"
