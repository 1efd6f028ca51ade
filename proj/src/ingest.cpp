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

#include "hstrat/ingest.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "hstrat/errors.hpp"

namespace hstrat {
namespace {

using json = nlohmann::json;

// --- byte helpers -------------------------------------------------------------

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((value >> (8 * b)) & 0xFF));
  }
}

template <typename T>
T get_le(std::string_view bytes, std::size_t offset) {
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    value |= static_cast<T>(static_cast<unsigned char>(bytes[offset + b])) << (8 * b);
  }
  return value;
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    const std::uint32_t min_cp[] = {0, 0x80, 0x800, 0x10000};
    if (cp < min_cp[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

// --- CSV ----------------------------------------------------------------------

using Record = std::vector<std::string>;

std::vector<Record> parse_csv(std::string_view text) {
  if (!valid_utf8(text)) throw EncodingError("csv: input is not valid UTF-8");
  std::vector<Record> records;
  Record record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t row = 1;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    // A blank line carries no record.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
    ++row;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started || !field.empty()) {
          throw ParseError("csv: stray quote", row, record.size());
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(ch);
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
    }
  }
  if (quoted) throw ParseError("csv: unterminated quote", row, record.size());
  if (!field.empty() || !record.empty() || field_started) end_record();
  return records;
}

std::string quote_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

double parse_double(const std::string& field, std::size_t row, std::size_t column) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError("csv: '" + field + "' is not a number", row, column);
  }
  return value;
}

int parse_int(const std::string& field, std::size_t row, std::size_t column) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError("csv: '" + field + "' is not an integer", row, column);
  }
  return value;
}

// Returns the body rows after checking the header shape.
std::vector<Record> checked_records(std::string_view text, std::size_t min_columns,
                                    std::string_view what, Record& header) {
  std::vector<Record> records = parse_csv(text);
  if (records.empty()) throw HeaderError(std::string(what) + ": missing header row");
  header = std::move(records.front());
  records.erase(records.begin());
  if (header.front() != "sample_id") {
    throw HeaderError(std::string(what) + ": first column must be 'sample_id'");
  }
  if (header.size() < min_columns) {
    throw HeaderError(std::string(what) + ": expected at least " + std::to_string(min_columns) +
                      " columns");
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != header.size()) {
      throw ParseError(std::string(what) + ": expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(records[r].size()),
                       r + 2, std::min(records[r].size(), header.size()));
    }
  }
  return records;
}

Matrix numeric_block(const std::vector<Record>& records, std::size_t columns, SampleIds& ids) {
  Matrix m(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(columns));
  ids.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    ids.push_back(records[r][0]);
    for (std::size_t c = 0; c < columns; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(records[r][c + 1], r + 2, c + 1);
    }
  }
  return m;
}

// --- JSON helpers -------------------------------------------------------------

void emit(const json& value, std::string& out, int depth) {
  const std::string indent(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string closing(static_cast<std::size_t>(2 * depth), ' ');
  switch (value.type()) {
    case json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ",\n";
        first = false;
        out += indent;
        out += json(key).dump();
        out += ": ";
        emit(item, out, depth + 1);
      }
      out += "\n" + closing + "}";
      return;
    }
    case json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalars = true;
      for (const auto& item : value) scalars = scalars && !item.is_structured();
      out += scalars ? "[" : "[\n";
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += scalars ? ", " : ",\n";
        first = false;
        if (!scalars) out += indent;
        emit(item, out, depth + 1);
      }
      out += scalars ? "]" : "\n" + closing + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw RangeError("json: non-finite number");
      out += format_double(v);
      return;
    }
    default:
      out += value.dump();
  }
}

json parse_document(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

void expect_format(const json& doc, std::string_view format) {
  if (!doc.is_object() || !doc.contains("format") || doc["format"] != format) {
    throw ValidationError("document is not a " + std::string(format) + " file");
  }
  if (!doc.contains("version") || doc["version"] != 1) {
    throw ValidationError(std::string(format) + ": unsupported version");
  }
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from(const json& j, std::string_view what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(std::string(what) + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, std::string_view what, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw ValidationError(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from(j[static_cast<std::size_t>(r)], what);
    if (row.size() != cols) throw DimensionError(std::string(what) + ": ragged rows");
    m.row(r) = row.transpose();
  }
  return m;
}

template <typename T>
T field(const json& doc, std::string_view key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw ValidationError("document missing field '" + std::string(key) + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("field '" + std::string(key) + "': " + e.what());
  }
}

const json& section(const json& doc, std::string_view key) {
  const auto it = doc.find(key);
  if (it == doc.end() || !it->is_object()) {
    throw ValidationError("document missing section '" + std::string(key) + "'");
  }
  return *it;
}

}  // namespace

// --- files --------------------------------------------------------------------

std::string read_file(const Path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return std::move(buffer).str();
}

void write_file(const Path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

// --- SEMB ---------------------------------------------------------------------

std::string encode_embeddings(const EmbeddingMatrix& embeddings) {
  if (embeddings.sample_ids.size() != embeddings.rows()) {
    throw AlignmentError("embeddings: sample id count does not match row count");
  }
  std::string ids;
  for (const auto& id : embeddings.sample_ids) {
    if (id.find('\n') != std::string::npos) throw EncodingError("embeddings: sample id with newline");
    ids += id;
    ids.push_back('\n');
  }
  std::string out(kEmbeddingMagic);
  put_le<std::uint32_t>(out, kEmbeddingVersion);
  put_le<std::uint64_t>(out, embeddings.rows());
  put_le<std::uint64_t>(out, embeddings.cols());
  put_le<std::uint64_t>(out, ids.size());
  out += ids;
  out.reserve(out.size() + embeddings.rows() * embeddings.cols() * 4);
  for (Eigen::Index r = 0; r < embeddings.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < embeddings.data.cols(); ++c) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(embeddings.data(r, c))));
    }
  }
  return out;
}

EmbeddingFileHeader decode_embedding_header(std::string_view bytes) {
  if (bytes.size() < kEmbeddingMagic.size() && kEmbeddingMagic.substr(0, bytes.size()) == bytes) {
    throw TruncationError("embeddings: truncated header");
  }
  if (bytes.size() < kEmbeddingMagic.size() || bytes.substr(0, kEmbeddingMagic.size()) != kEmbeddingMagic) {
    throw MagicError("embeddings: bad magic, expected 'SEMB1'");
  }
  if (bytes.size() < kEmbeddingHeaderSize) throw TruncationError("embeddings: truncated header");
  EmbeddingFileHeader header;
  header.version = get_le<std::uint32_t>(bytes, 5);
  header.n_rows = get_le<std::uint64_t>(bytes, 9);
  header.n_cols = get_le<std::uint64_t>(bytes, 17);
  header.id_block_len = get_le<std::uint64_t>(bytes, 25);
  if (header.version != kEmbeddingVersion) {
    throw MagicError("embeddings: unsupported version " + std::to_string(header.version));
  }
  return header;
}

EmbeddingMatrix decode_embeddings(std::string_view bytes) {
  const EmbeddingFileHeader header = decode_embedding_header(bytes);
  const std::size_t available = bytes.size() - kEmbeddingHeaderSize;
  if (header.id_block_len > available) throw TruncationError("embeddings: truncated id block");
  const std::string_view block = bytes.substr(kEmbeddingHeaderSize, header.id_block_len);
  if (!valid_utf8(block)) throw EncodingError("embeddings: id block is not valid UTF-8");

  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / 4;
  if (header.n_cols != 0 && header.n_rows > limit / header.n_cols) {
    throw TruncationError("embeddings: declared payload size overflows");
  }
  const std::uint64_t payload = header.n_rows * header.n_cols * 4;
  const std::size_t remaining = available - header.id_block_len;
  if (remaining < payload) {
    throw TruncationError("embeddings: payload has " + std::to_string(remaining) +
                          " bytes, header promises " + std::to_string(payload));
  }
  if (remaining > payload) {
    throw DimensionError("embeddings: " + std::to_string(remaining - payload) +
                         " trailing bytes after payload");
  }

  EmbeddingMatrix out;
  std::size_t start = 0;
  while (start < block.size()) {
    const std::size_t end = block.find('\n', start);
    if (end == std::string_view::npos) throw EncodingError("embeddings: unterminated sample id");
    if (end == start) throw EncodingError("embeddings: empty sample id");
    out.sample_ids.emplace_back(block.substr(start, end - start));
    start = end + 1;
  }
  if (out.sample_ids.size() != header.n_rows) {
    throw EncodingError("embeddings: id block holds " + std::to_string(out.sample_ids.size()) +
                        " ids, header declares " + std::to_string(header.n_rows));
  }

  out.data.resize(static_cast<Eigen::Index>(header.n_rows), static_cast<Eigen::Index>(header.n_cols));
  std::size_t offset = kEmbeddingHeaderSize + header.id_block_len;
  for (Eigen::Index r = 0; r < out.data.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.data.cols(); ++c) {
      out.data(r, c) = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
      offset += 4;
    }
  }
  return out;
}

EmbeddingMatrix load_embeddings(const Path& path) {
  const std::string bytes = read_file(path);
  if (path.extension() == ".csv") return parse_embeddings_csv(bytes);
  return decode_embeddings(bytes);
}

void write_embeddings(const EmbeddingMatrix& embeddings, const Path& path) {
  write_file(path, encode_embeddings(embeddings));
}

// --- tables -------------------------------------------------------------------

LabelVector parse_labels(std::string_view text) {
  Record header;
  const auto records = checked_records(text, 2, "labels", header);
  if (header.size() != 2 || header[1] != "label") {
    throw HeaderError("labels: header must be 'sample_id,label'");
  }
  LabelVector out;
  for (std::size_t r = 0; r < records.size(); ++r) {
    out.sample_ids.push_back(records[r][0]);
    out.labels.push_back(parse_int(records[r][1], r + 2, 1));
  }
  check_sample_ids(out.sample_ids, "labels");
  return out;
}

PredictionMatrix parse_predictions(std::string_view text) {
  Record header;
  const auto records = checked_records(text, 3, "predictions", header);
  PredictionMatrix out;
  out.probs = numeric_block(records, header.size() - 1, out.sample_ids);
  check_predictions(out);
  return out;
}

MetadataTable parse_metadata(std::string_view text) {
  Record header;
  const auto records = checked_records(text, 2, "metadata", header);
  MetadataTable out;
  out.attribute_names.assign(header.begin() + 1, header.end());
  out.columns.resize(out.attribute_names.size());
  for (const auto& record : records) {
    out.sample_ids.push_back(record[0]);
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
      const std::string& cell = record[c + 1];
      if (cell == kMissingToken) {
        out.columns[c].emplace_back(std::nullopt);
      } else {
        out.columns[c].emplace_back(cell);
      }
    }
  }
  check_metadata(out);
  return out;
}

EmbeddingMatrix parse_embeddings_csv(std::string_view text) {
  Record header;
  const auto records = checked_records(text, 2, "embeddings", header);
  EmbeddingMatrix out;
  out.data = numeric_block(records, header.size() - 1, out.sample_ids);
  check_sample_ids(out.sample_ids, "embeddings");
  return out;
}

Table load_table(const Path& path, TableKind kind) {
  const std::string text = read_file(path);
  switch (kind) {
    case TableKind::kLabels:
      return parse_labels(text);
    case TableKind::kPredictions:
      return parse_predictions(text);
    case TableKind::kMetadata:
      return parse_metadata(text);
  }
  throw ValidationError("unknown table kind");
}

LabelVector load_labels(const Path& path) { return parse_labels(read_file(path)); }
PredictionMatrix load_predictions(const Path& path) { return parse_predictions(read_file(path)); }
MetadataTable load_metadata(const Path& path) { return parse_metadata(read_file(path)); }

std::string format_labels(const LabelVector& labels) {
  std::string out = "sample_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += quote_field(labels.sample_ids[i]) + "," + std::to_string(labels.labels[i]) + "\n";
  }
  return out;
}

std::string format_predictions(const PredictionMatrix& predictions) {
  std::string out = "sample_id";
  for (std::size_t c = 0; c < predictions.num_classes(); ++c) out += ",c" + std::to_string(c);
  out += "\n";
  for (Eigen::Index r = 0; r < predictions.probs.rows(); ++r) {
    out += quote_field(predictions.sample_ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < predictions.probs.cols(); ++c) {
      out += "," + format_double(predictions.probs(r, c));
    }
    out += "\n";
  }
  return out;
}

std::string format_metadata(const MetadataTable& metadata) {
  std::string out = "sample_id";
  for (const auto& name : metadata.attribute_names) out += "," + quote_field(name);
  out += "\n";
  for (std::size_t r = 0; r < metadata.rows(); ++r) {
    out += quote_field(metadata.sample_ids[r]);
    for (const auto& column : metadata.columns) {
      out += ",";
      out += column[r] ? quote_field(*column[r]) : std::string(kMissingToken);
    }
    out += "\n";
  }
  return out;
}

void write_labels(const LabelVector& labels, const Path& path) {
  write_file(path, format_labels(labels));
}
void write_predictions(const PredictionMatrix& predictions, const Path& path) {
  write_file(path, format_predictions(predictions));
}
void write_metadata(const MetadataTable& metadata, const Path& path) {
  write_file(path, format_metadata(metadata));
}

// --- documents ----------------------------------------------------------------

std::string canonical_json(const json& document) {
  std::string out;
  emit(document, out, 0);
  out.push_back('\n');
  return out;
}

void write_report(const ReportDocument& report, const Path& path) {
  write_file(path, canonical_json(report.body));
}

ReportDocument load_report(const Path& path) {
  ReportDocument report;
  report.body = parse_document(read_file(path), "report");
  return report;
}

json model_to_json(const SubgroupModel& model) {
  json doc;
  doc["format"] = "hstrat-model";
  doc["version"] = 1;
  doc["seed"] = model.seed;
  doc["pca"] = {{"mean", vector_json(model.pca.mean)},
                {"components", matrix_json(model.pca.components)},
                {"explained_variance", vector_json(model.pca.explained_variance)}};
  doc["mixture"] = {{"gamma", model.params.gamma},
                    {"priors", vector_json(model.params.priors)},
                    {"means", matrix_json(model.params.means)},
                    {"variances", matrix_json(model.params.variances)},
                    {"pred_params", matrix_json(model.params.pred_params)}};
  doc["diagnostics"] = {{"log_likelihood", model.diagnostics.log_likelihood},
                        {"iterations", model.diagnostics.iterations},
                        {"restart", model.diagnostics.restart},
                        {"converged", model.diagnostics.converged}};
  return doc;
}

SubgroupModel model_from_json(const json& doc) {
  expect_format(doc, "hstrat-model");
  SubgroupModel model;
  model.seed = field<std::uint64_t>(doc, "seed");
  const json& pca = section(doc, "pca");
  model.pca.mean = vector_from(pca.at("mean"), "pca.mean");
  model.pca.components = matrix_from(pca.at("components"), "pca.components");
  model.pca.explained_variance = vector_from(pca.at("explained_variance"), "pca.explained_variance");
  check_pca_model(model.pca);
  const json& mix = section(doc, "mixture");
  model.params.gamma = field<double>(mix, "gamma");
  model.params.priors = vector_from(mix.at("priors"), "mixture.priors");
  model.params.means = matrix_from(mix.at("means"), "mixture.means");
  model.params.variances = matrix_from(mix.at("variances"), "mixture.variances");
  model.params.pred_params = matrix_from(mix.at("pred_params"), "mixture.pred_params");
  check_params(model.params);
  if (model.params.dim() != model.pca.output_dim()) {
    throw DimensionError("model: mixture dimension does not match PCA output");
  }
  const json& diag = section(doc, "diagnostics");
  model.diagnostics.log_likelihood = field<double>(diag, "log_likelihood");
  model.diagnostics.iterations = field<std::size_t>(diag, "iterations");
  model.diagnostics.restart = field<std::size_t>(diag, "restart");
  model.diagnostics.converged = field<bool>(diag, "converged");
  return model;
}

void write_model(const SubgroupModel& model, const Path& path) {
  write_file(path, canonical_json(model_to_json(model)));
}

SubgroupModel load_model(const Path& path) {
  return model_from_json(parse_document(read_file(path), "model"));
}

json assignment_to_json(const SubgroupAssignment& a) {
  json doc;
  doc["format"] = "hstrat-assignment";
  doc["version"] = 1;
  doc["gamma"] = a.gamma;
  doc["seed"] = a.seed;
  doc["n_components"] = a.n_components;
  doc["sample_ids"] = a.sample_ids;
  doc["subgroups"] = a.hard_labels;
  doc["responsibilities"] = matrix_json(a.responsibilities);
  return doc;
}

SubgroupAssignment assignment_from_json(const json& doc) {
  expect_format(doc, "hstrat-assignment");
  SubgroupAssignment a;
  a.gamma = field<double>(doc, "gamma");
  a.seed = field<std::uint64_t>(doc, "seed");
  a.n_components = field<std::size_t>(doc, "n_components");
  a.sample_ids = field<SampleIds>(doc, "sample_ids");
  a.hard_labels = field<std::vector<std::size_t>>(doc, "subgroups");
  a.responsibilities = matrix_from(doc.at("responsibilities"), "responsibilities",
                                   static_cast<Eigen::Index>(a.n_components));
  if (a.hard_labels.size() != a.sample_ids.size() ||
      static_cast<std::size_t>(a.responsibilities.rows()) != a.sample_ids.size() ||
      static_cast<std::size_t>(a.responsibilities.cols()) != a.n_components) {
    throw AlignmentError("assignment: field lengths disagree");
  }
  check_sample_ids(a.sample_ids, "assignment");
  for (const std::size_t s : a.hard_labels) {
    if (s >= a.n_components) throw RangeError("assignment: subgroup id out of range");
  }
  return a;
}

void write_assignment(const SubgroupAssignment& assignment, const Path& path) {
  write_file(path, canonical_json(assignment_to_json(assignment)));
}

SubgroupAssignment load_assignment(const Path& path) {
  return assignment_from_json(parse_document(read_file(path), "assignment"));
}

void write_world(const SynthWorld& world, const Path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  for (const SynthSplit* s : {&world.train, &world.validation, &world.test}) {
    const std::string prefix(to_string(s->bundle.split));
    write_embeddings(s->bundle.embeddings, dir / (prefix + "_embeddings.semb"));
    write_predictions(s->bundle.predictions, dir / (prefix + "_predictions.csv"));
    write_labels(*s->bundle.labels, dir / (prefix + "_labels.csv"));
    write_metadata(*s->bundle.metadata, dir / (prefix + "_metadata.csv"));
    write_metadata(s->truth.as_metadata(), dir / (prefix + "_truth.csv"));
  }
}

}  // namespace hstrat
