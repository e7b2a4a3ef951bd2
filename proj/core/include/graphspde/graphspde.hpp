#pragma once

#include "graphspde/data_io.hpp"
#include "graphspde/errors.hpp"
#include "graphspde/eval.hpp"
#include "graphspde/gp.hpp"
#include "graphspde/gram.hpp"
#include "graphspde/graph.hpp"
#include "graphspde/kernels.hpp"
#include "graphspde/optimize.hpp"
#include "graphspde/sde.hpp"
#include "graphspde/spectral.hpp"
