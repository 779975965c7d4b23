#pragma once

#include "kcurate/error.hpp"
#include "kcurate/utf8.hpp"
#include "kcurate/corpus.hpp"
#include "kcurate/corpus_io.hpp"
#include "kcurate/classify.hpp"
#include "kcurate/dedup.hpp"
#include "kcurate/heuristics.hpp"
#include "kcurate/ngram.hpp"
#include "kcurate/quality.hpp"
#include "kcurate/refiners.hpp"
#include "kcurate/coreset.hpp"
#include "kcurate/tokenizer.hpp"
#include "kcurate/longctx.hpp"
#include "kcurate/synth.hpp"
#include "kcurate/route.hpp"
#include "kcurate/stats.hpp"
#include "kcurate/digest.hpp"
#include "kcurate/pipeline.hpp"
#include "kcurate/http_clients.hpp"
