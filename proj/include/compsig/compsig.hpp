#pragma once

#include "compsig/error.hpp"
#include "compsig/rng.hpp"
#include "compsig/parallel.hpp"
#include "compsig/unicode.hpp"
#include "compsig/corpus.hpp"
#include "compsig/compress.hpp"
#include "compsig/synth.hpp"
#include "compsig/features.hpp"
#include "compsig/model.hpp"
#include "compsig/shap.hpp"
#include "compsig/table.hpp"
#include "compsig/report.hpp"
