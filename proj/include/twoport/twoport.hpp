#pragma once

#include "twoport/autodiff.hpp"
#include "twoport/circuit.hpp"
#include "twoport/counting.hpp"
#include "twoport/dataset.hpp"
#include "twoport/diffsim.hpp"
#include "twoport/enumerate.hpp"
#include "twoport/errors.hpp"
#include "twoport/eval.hpp"
#include "twoport/ga.hpp"
#include "twoport/nn/arch.hpp"
#include "twoport/nn/decoder.hpp"
#include "twoport/nn/hypernet.hpp"
#include "twoport/nn/train.hpp"
#include "twoport/rng.hpp"
#include "twoport/spectrum.hpp"
#include "twoport/spectrum_io.hpp"
#include "twoport/threads.hpp"
#include "twoport/value_grid.hpp"
