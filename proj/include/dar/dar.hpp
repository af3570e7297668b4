#pragma once

// Umbrella header for the direction-aware diagonal autoregressive toolkit.

#include "dar/ablation.hpp"
#include "dar/checkpoint.hpp"
#include "dar/codebook.hpp"
#include "dar/common.hpp"
#include "dar/config.hpp"
#include "dar/dataset.hpp"
#include "dar/decoder.hpp"
#include "dar/frechet.hpp"
#include "dar/gradcheck.hpp"
#include "dar/model.hpp"
#include "dar/optim.hpp"
#include "dar/rope.hpp"
#include "dar/sampler.hpp"
#include "dar/scan.hpp"
#include "dar/tape.hpp"
#include "dar/tensor.hpp"
#include "dar/train.hpp"
