#pragma once

#include "dragonking/error.hpp"
#include "dragonking/random.hpp"
#include "dragonking/special.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/distributions.hpp"
#include "dragonking/tail_model.hpp"
#include "dragonking/edf.hpp"
#include "dragonking/tail_fit.hpp"
#include "dragonking/dragon_king.hpp"
#include "dragonking/monte_carlo.hpp"
#include "dragonking/wavelet.hpp"
#include "dragonking/preprocessing.hpp"
#include "dragonking/io.hpp"
