// SPDX-License-Identifier: Apache-2.0
//
// gee-precoder: energy-efficient MIMO precoding under imperfect CSI
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "geeprec/sdp.hpp"
#include "geeprec/types.hpp"

#include <json.hpp>

#include <filesystem>

// JSON schemas. A complex matrix is an array of rows, each row an array of
// [re, im] pairs. A ChannelSet is {"K": K, "H": [[H_00, H_01, ...], ...]}
// with H[i][j] the link from transmitter j to receiver i.

namespace geeprec {

using json = nlohmann::json;

json matrix_to_json(const MatC& m);
MatC matrix_from_json(const json& j);

void to_json(json& j, const SystemConfig& cfg);
void from_json(const json& j, SystemConfig& cfg);

void to_json(json& j, const ChannelSet& channels);
void from_json(const json& j, ChannelSet& channels);

void to_json(json& j, const GeeReport& report);
void from_json(const json& j, GeeReport& report);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

namespace sdp {

void to_json(json& j, const SdpProblem& problem);
void from_json(const json& j, SdpProblem& problem);

void to_json(json& j, const SdpSolution& solution);
void from_json(const json& j, SdpSolution& solution);

} // namespace sdp

} // namespace geeprec
