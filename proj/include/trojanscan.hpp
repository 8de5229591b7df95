// Copyright 2026 The TrojanScan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TROJANSCAN_TROJANSCAN_HPP_
#define TROJANSCAN_TROJANSCAN_HPP_

#include "trojanscan/benchmark.hpp"
#include "trojanscan/config_json.hpp"
#include "trojanscan/error.hpp"
#include "trojanscan/evaluation.hpp"
#include "trojanscan/examples_io.hpp"
#include "trojanscan/external_oracle.hpp"
#include "trojanscan/filter_detector.hpp"
#include "trojanscan/filters.hpp"
#include "trojanscan/image.hpp"
#include "trojanscan/manifest.hpp"
#include "trojanscan/metrics.hpp"
#include "trojanscan/oracle.hpp"
#include "trojanscan/pipeline.hpp"
#include "trojanscan/png_io.hpp"
#include "trojanscan/polygon_detector.hpp"
#include "trojanscan/stage_result.hpp"
#include "trojanscan/synthetic_oracle.hpp"
#include "trojanscan/trigger.hpp"

#endif  // TROJANSCAN_TROJANSCAN_HPP_
