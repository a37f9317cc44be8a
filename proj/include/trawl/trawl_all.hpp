#pragma once

#include "clean.hpp"
#include "estimate.hpp"
#include "io.hpp"
#include "levy.hpp"
#include "model.hpp"
#include "simulate.hpp"
#include "special.hpp"
#include "theory.hpp"
#include "trawl.hpp"
#include "version.hpp"
