#pragma once

// Umbrella header for the desk-scale grasp perception and policy toolkit:
// domain-randomized augmentation, depth-conditioned grasp geometry, episode
// ingestion, observation encoding, a DDIM action head and the exposure
// robustness benchmark.

#include "graspkit/core/error.hpp"
#include "graspkit/core/image.hpp"
#include "graspkit/core/linalg.hpp"
#include "graspkit/core/random.hpp"

#include "graspkit/io/pfm.hpp"
#include "graspkit/io/ppm.hpp"
#include "graspkit/io/tensor_file.hpp"

#include "graspkit/augment/augfusion.hpp"
#include "graspkit/augment/exposure.hpp"
#include "graspkit/augment/primitives.hpp"

#include "graspkit/geom/grasp.hpp"
#include "graspkit/geom/intrinsics.hpp"
#include "graspkit/geom/rotation.hpp"

#include "graspkit/data/manifest.hpp"
#include "graspkit/data/synthetic.hpp"

#include "graspkit/encoder/encoder.hpp"

#include "graspkit/policy/denoiser.hpp"
#include "graspkit/policy/diffusion.hpp"
#include "graspkit/policy/gradcheck.hpp"
#include "graspkit/policy/schedule.hpp"
#include "graspkit/policy/train.hpp"

#include "graspkit/bench/metrics.hpp"
#include "graspkit/bench/sweep.hpp"
