#pragma once

#include "conmap/bench.hpp"
#include "conmap/contagion.hpp"
#include "conmap/embed.hpp"
#include "conmap/error.hpp"
#include "conmap/graph.hpp"
#include "conmap/io.hpp"
#include "conmap/matrix.hpp"
#include "conmap/rng.hpp"
#include "conmap/tda.hpp"
#include "conmap/version.hpp"
