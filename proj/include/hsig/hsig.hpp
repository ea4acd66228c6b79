#pragma once

// Everything except the HTTP service, which pulls in httplib.
#include "hsig/classifier.hpp"
#include "hsig/dataset.hpp"
#include "hsig/dtw.hpp"
#include "hsig/enrollment.hpp"
#include "hsig/error.hpp"
#include "hsig/evaluation.hpp"
#include "hsig/partitioning.hpp"
#include "hsig/preprocess.hpp"
#include "hsig/profile_io.hpp"
#include "hsig/signature_io.hpp"
#include "hsig/synthetic.hpp"
#include "hsig/types.hpp"
