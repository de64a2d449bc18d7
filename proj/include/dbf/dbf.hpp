#pragma once

#include "dbf/convolve.hpp"
#include "dbf/fast_exp.hpp"
#include "dbf/filters.hpp"
#include "dbf/format.hpp"
#include "dbf/harness.hpp"
#include "dbf/image.hpp"
#include "dbf/metrics.hpp"
#include "dbf/noise.hpp"
#include "dbf/parallel.hpp"
#include "dbf/pgm.hpp"
#include "dbf/png.hpp"
#include "dbf/report.hpp"
#include "dbf/sure.hpp"
#include "dbf/synthetic.hpp"
#include "dbf/tensor.hpp"
