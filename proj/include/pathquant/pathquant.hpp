#pragma once

#include "pathquant/errors.hpp"
#include "pathquant/numerics.hpp"
#include "pathquant/geometry.hpp"
#include "pathquant/path_space.hpp"
#include "pathquant/chen.hpp"
#include "pathquant/prequantum.hpp"
#include "pathquant/klein_gordon.hpp"
#include "pathquant/verify.hpp"
