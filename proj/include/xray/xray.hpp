#pragma once

#include "xray/common.hpp"
#include "xray/detection.hpp"
#include "xray/driver.hpp"
#include "xray/gram.hpp"
#include "xray/ingest.hpp"
#include "xray/nnls.hpp"
#include "xray/parallel.hpp"
#include "xray/sparse.hpp"
#include "xray/synth.hpp"
