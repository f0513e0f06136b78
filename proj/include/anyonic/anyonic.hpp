#pragma once

#include "types.hpp"
#include "model.hpp"
#include "model_io.hpp"
#include "models.hpp"
#include "chain.hpp"
#include "state.hpp"
#include "config.hpp"
#include "oracle.hpp"
#include "interferometry.hpp"
#include "twisted.hpp"
#include "ising.hpp"
#include "sampling.hpp"
