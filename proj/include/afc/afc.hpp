#pragma once

#include "afc/spectral.hpp"
#include "afc/ions.hpp"
#include "afc/response.hpp"
#include "afc/memory.hpp"
#include "afc/optimize.hpp"
#include "afc/config.hpp"
#include "afc/scenario.hpp"
