#pragma once

#include "acoustics.hpp"
#include "beamform.hpp"
#include "codes.hpp"
#include "config.hpp"
#include "fft.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "optimize.hpp"
#include "pipeline.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "signal.hpp"
#include "txprofiles.hpp"
