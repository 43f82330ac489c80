#ifndef QSPEC_QSPEC_HPP
#define QSPEC_QSPEC_HPP

// Umbrella header for the quantile spectral analysis toolkit.

#include "qspec/cvm.hpp"
#include "qspec/errors.hpp"
#include "qspec/fft.hpp"
#include "qspec/harness.hpp"
#include "qspec/parallel.hpp"
#include "qspec/pointwise.hpp"
#include "qspec/rng.hpp"
#include "qspec/series.hpp"
#include "qspec/simulate.hpp"
#include "qspec/special.hpp"
#include "qspec/spectral.hpp"
#include "qspec/windows.hpp"

#endif  // QSPEC_QSPEC_HPP
