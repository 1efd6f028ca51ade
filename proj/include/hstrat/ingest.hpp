// Copyright 2026 The hstrat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

#include "hstrat/datamodel.hpp"
#include "hstrat/mixture.hpp"
#include "hstrat/synthworld.hpp"

namespace hstrat {

using Path = std::filesystem::path;

// --- SEMB binary embedding files -------------------------------------------
//
//   offset  size  field
//   0       5     magic "SEMB1"
//   5       4     version, u32 LE, = 1
//   9       8     n_rows, u64 LE
//   17      8     n_cols, u64 LE
//   25      8     id_block_len, u64 LE
//   33      ...   id block: UTF-8 sample ids, each terminated by '\n'
//   ...     ...   n_rows * n_cols binary32 LE floats, row-major
//
// The file must end exactly after the payload.

inline constexpr std::string_view kEmbeddingMagic = "SEMB1";
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderSize = 33;

struct EmbeddingFileHeader {
  std::uint32_t version = kEmbeddingVersion;
  std::uint64_t n_rows = 0;
  std::uint64_t n_cols = 0;
  std::uint64_t id_block_len = 0;
};

std::string encode_embeddings(const EmbeddingMatrix& embeddings);
EmbeddingMatrix decode_embeddings(std::string_view bytes);
EmbeddingFileHeader decode_embedding_header(std::string_view bytes);

// Loads SEMB, or a numeric CSV (`sample_id,<dims...>`) when the path ends in
// ".csv".
EmbeddingMatrix load_embeddings(const Path& path);
void write_embeddings(const EmbeddingMatrix& embeddings, const Path& path);

// --- CSV tables --------------------------------------------------------------

enum class TableKind { kLabels, kPredictions, kMetadata };

using Table = std::variant<LabelVector, PredictionMatrix, MetadataTable>;

inline constexpr std::string_view kMissingToken = "NA";

LabelVector parse_labels(std::string_view text);
PredictionMatrix parse_predictions(std::string_view text);
MetadataTable parse_metadata(std::string_view text);
EmbeddingMatrix parse_embeddings_csv(std::string_view text);

Table load_table(const Path& path, TableKind kind);
LabelVector load_labels(const Path& path);
PredictionMatrix load_predictions(const Path& path);
MetadataTable load_metadata(const Path& path);

std::string format_labels(const LabelVector& labels);
std::string format_predictions(const PredictionMatrix& predictions);
std::string format_metadata(const MetadataTable& metadata);

void write_labels(const LabelVector& labels, const Path& path);
void write_predictions(const PredictionMatrix& predictions, const Path& path);
void write_metadata(const MetadataTable& metadata, const Path& path);

// --- Structured documents ----------------------------------------------------

// Sorted keys, two-space indent, every floating-point number printed with 17
// significant digits. Non-finite numbers are rejected.
std::string canonical_json(const nlohmann::json& document);

struct ReportDocument {
  nlohmann::json body;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

void write_report(const ReportDocument& report, const Path& path);
ReportDocument load_report(const Path& path);

nlohmann::json model_to_json(const SubgroupModel& model);
SubgroupModel model_from_json(const nlohmann::json& document);
void write_model(const SubgroupModel& model, const Path& path);
SubgroupModel load_model(const Path& path);

nlohmann::json assignment_to_json(const SubgroupAssignment& assignment);
SubgroupAssignment assignment_from_json(const nlohmann::json& document);
void write_assignment(const SubgroupAssignment& assignment, const Path& path);
SubgroupAssignment load_assignment(const Path& path);

// Writes <dir>/<split>_{embeddings.semb,predictions.csv,labels.csv,
// metadata.csv,truth.csv} for all three splits.
void write_world(const SynthWorld& world, const Path& dir);

std::string read_file(const Path& path);
void write_file(const Path& path, std::string_view contents);

}  // namespace hstrat
