#pragma once

#include "constants.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "frames.hpp"
#include "molecule.hpp"
#include "normalmodes.hpp"
#include "quadform.hpp"
#include "rotor.hpp"
#include "watson.hpp"
