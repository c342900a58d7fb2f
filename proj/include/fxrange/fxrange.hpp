#pragma once

#include "fxrange/affine.hpp"
#include "fxrange/affine_matrix.hpp"
#include "fxrange/baseline.hpp"
#include "fxrange/bitwidth.hpp"
#include "fxrange/config.hpp"
#include "fxrange/dataset.hpp"
#include "fxrange/fixed_point.hpp"
#include "fxrange/fxsim.hpp"
#include "fxrange/interval.hpp"
#include "fxrange/observed_range.hpp"
#include "fxrange/oselm.hpp"
#include "fxrange/pipeline.hpp"
#include "fxrange/range_analysis.hpp"
#include "fxrange/range_report.hpp"
#include "fxrange/report_io.hpp"
#include "fxrange/variables.hpp"
