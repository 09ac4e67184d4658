#ifndef WAVECANCOH_WAVECANCOH_HPP
#define WAVECANCOH_WAVECANCOH_HPP

#include "wavecancoh/baseline.hpp"
#include "wavecancoh/cancoh.hpp"
#include "wavecancoh/error.hpp"
#include "wavecancoh/experiments.hpp"
#include "wavecancoh/inference.hpp"
#include "wavecancoh/io.hpp"
#include "wavecancoh/linalg.hpp"
#include "wavecancoh/lws.hpp"
#include "wavecancoh/panel.hpp"
#include "wavecancoh/parallel.hpp"
#include "wavecancoh/rng.hpp"
#include "wavecancoh/simulate.hpp"
#include "wavecancoh/wavelets.hpp"

#endif  // WAVECANCOH_WAVECANCOH_HPP
