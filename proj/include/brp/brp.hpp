#pragma once

#include "brp/approx.hpp"
#include "brp/bounds.hpp"
#include "brp/errors.hpp"
#include "brp/io.hpp"
#include "brp/matrix.hpp"
#include "brp/random.hpp"
#include "brp/version.hpp"
