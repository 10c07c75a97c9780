#pragma once

#include "rkcat/errors.hpp"
#include "rkcat/linalg.hpp"
#include "rkcat/report.hpp"
#include "rkcat/bundle.hpp"
#include "rkcat/kernel.hpp"
#include "rkcat/algebra.hpp"
#include "rkcat/grassmann.hpp"
#include "rkcat/cpmap.hpp"
#include "rkcat/universality.hpp"
#include "rkcat/homogeneous.hpp"
#include "rkcat/random.hpp"
