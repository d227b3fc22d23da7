// qtomo.hpp — umbrella header.

#pragma once

#include "qtomo/calibration.hpp"
#include "qtomo/dynamics.hpp"
#include "qtomo/ensemble.hpp"
#include "qtomo/experiments.hpp"
#include "qtomo/qcore.hpp"
#include "qtomo/reconstruction.hpp"
#include "qtomo/rotations.hpp"
