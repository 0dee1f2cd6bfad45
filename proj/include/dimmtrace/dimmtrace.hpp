/*
 * Copyright (c) 2026 The dimmtrace Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "dimmtrace/address_mapping.hpp"
#include "dimmtrace/analysis/intervals.hpp"
#include "dimmtrace/analysis/prefetch.hpp"
#include "dimmtrace/analysis/reuse.hpp"
#include "dimmtrace/analysis/run_length.hpp"
#include "dimmtrace/analysis/streams.hpp"
#include "dimmtrace/bandwidth.hpp"
#include "dimmtrace/binary_io.hpp"
#include "dimmtrace/cdf.hpp"
#include "dimmtrace/command_file.hpp"
#include "dimmtrace/ddr_decoder.hpp"
#include "dimmtrace/dma.hpp"
#include "dimmtrace/error.hpp"
#include "dimmtrace/fifo.hpp"
#include "dimmtrace/journal_io.hpp"
#include "dimmtrace/ledger_io.hpp"
#include "dimmtrace/mapping_index.hpp"
#include "dimmtrace/merge.hpp"
#include "dimmtrace/pipeline.hpp"
#include "dimmtrace/semantic.hpp"
#include "dimmtrace/trace_codec.hpp"
#include "dimmtrace/types.hpp"
#include "dimmtrace/verify.hpp"
#include "dimmtrace/version.hpp"
#include "dimmtrace/workload/generator.hpp"
#include "dimmtrace/workload/rng.hpp"
#include "dimmtrace/workload/scenario.hpp"
