#ifndef NOISEFP_NOISEFP_HPP
#define NOISEFP_NOISEFP_HPP

#include "error.hpp"
#include "extraction.hpp"
#include "image.hpp"
#include "matching.hpp"
#include "simconfig.hpp"
#include "simharness.hpp"
#include "stats.hpp"
#include "store.hpp"
#include "svg.hpp"

#endif  // NOISEFP_NOISEFP_HPP
