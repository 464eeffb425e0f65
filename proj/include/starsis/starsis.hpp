#pragma once

#include "starsis/params.hpp"
#include "starsis/graph.hpp"
#include "starsis/reduced_map.hpp"
#include "starsis/dynamics.hpp"
#include "starsis/spectral.hpp"
#include "starsis/multilevel.hpp"
#include "starsis/scalar.hpp"
