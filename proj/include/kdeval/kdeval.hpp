#pragma once

#include "kdeval/baseline_indices.hpp"
#include "kdeval/config.hpp"
#include "kdeval/data_io.hpp"
#include "kdeval/density.hpp"
#include "kdeval/harness.hpp"
#include "kdeval/kdi.hpp"
#include "kdeval/partition.hpp"
#include "kdeval/report.hpp"
#include "kdeval/rng.hpp"
#include "kdeval/svg.hpp"
#include "kdeval/text.hpp"
