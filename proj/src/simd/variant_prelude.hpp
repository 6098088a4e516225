#pragma once

// Headers every kernel variant TU needs before opening its namespace.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "igkit/parallel.hpp"
#include "igkit/simd/kernels.hpp"
