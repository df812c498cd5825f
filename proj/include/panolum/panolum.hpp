#pragma once

// Annual panoramic luminance prediction toolkit: HDR panorama I/O, weather
// and solar geometry, training-sample selection, a two-branch dense network
// trained on per-pixel features, visual-comfort evaluation metrics, and an
// analytic box-room oracle for end-to-end verification.

#include "panolum/common.hpp"
#include "panolum/dataset.hpp"
#include "panolum/encoding.hpp"
#include "panolum/epw.hpp"
#include "panolum/glare.hpp"
#include "panolum/hdr.hpp"
#include "panolum/metrics.hpp"
#include "panolum/model_io.hpp"
#include "panolum/network.hpp"
#include "panolum/oracle.hpp"
#include "panolum/report.hpp"
#include "panolum/sampling.hpp"
#include "panolum/solar.hpp"
#include "panolum/spherical.hpp"
#include "panolum/training.hpp"
