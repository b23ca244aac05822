// Copyright 2026 The clinner Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLINNER_CLINNER_HPP
#define CLINNER_CLINNER_HPP

#include "clinner/analytics.hpp"
#include "clinner/conll.hpp"
#include "clinner/corpus.hpp"
#include "clinner/curation.hpp"
#include "clinner/decode.hpp"
#include "clinner/error.hpp"
#include "clinner/eval.hpp"
#include "clinner/features.hpp"
#include "clinner/finetune.hpp"
#include "clinner/gazetteer.hpp"
#include "clinner/ingest.hpp"
#include "clinner/jsonl.hpp"
#include "clinner/scheme.hpp"
#include "clinner/synthetic.hpp"
#include "clinner/tagger.hpp"
#include "clinner/text.hpp"

#endif  // CLINNER_CLINNER_HPP
