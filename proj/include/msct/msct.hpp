#pragma once

#include "msct/binning.hpp"
#include "msct/error.hpp"
#include "msct/fams.hpp"
#include "msct/graphcut.hpp"
#include "msct/io.hpp"
#include "msct/metrics.hpp"
#include "msct/segmentation.hpp"
#include "msct/synth.hpp"
#include "msct/volume.hpp"
