#pragma once

#include "opshrink/curve_table.hpp"
#include "opshrink/denoiser.hpp"
#include "opshrink/errors.hpp"
#include "opshrink/experiments.hpp"
#include "opshrink/linalg.hpp"
#include "opshrink/matrix_io.hpp"
#include "opshrink/random.hpp"
#include "opshrink/shrinker.hpp"
#include "opshrink/spike_asymptotics.hpp"
#include "opshrink/spiked_model.hpp"
