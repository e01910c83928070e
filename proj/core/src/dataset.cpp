#include "ealgan/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ealgan/format.hpp"
#include "ealgan/rng.hpp"

namespace ealgan {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::size_t Dataset::anomaly_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.features = gather_rows(features, indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(i));
  out.feature_names = feature_names;
  out.source_tag = source_tag;
  return out;
}

void Dataset::validate() const {
  if (features.rows() != labels.size()) {
    throw DataError("dataset '" + source_tag + "': " + std::to_string(features.rows()) +
                    " rows but " + std::to_string(labels.size()) + " labels");
  }
  if (labels.size() < 2) throw DataError("dataset '" + source_tag + "': needs at least 2 samples");
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("dataset '" + source_tag + "': label not in {0,1}");
  }
  if (!features.all_finite()) throw DataError("dataset '" + source_tag + "': non-finite feature");
}

NormalizerState NormalizerState::fit(const Matrix& x) {
  if (x.rows() == 0) throw DataError("normalize: empty training set");
  NormalizerState s;
  s.min.assign(x.cols(), 0.0);
  s.max.assign(x.cols(), 0.0);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    s.min[j] = s.max[j] = x(0, j);
    for (std::size_t i = 1; i < x.rows(); ++i) {
      s.min[j] = std::min(s.min[j], x(i, j));
      s.max[j] = std::max(s.max[j], x(i, j));
    }
  }
  return s;
}

Matrix NormalizerState::apply(const Matrix& x) const {
  if (x.cols() != min.size()) {
    throw ShapeError("normalize: data has " + std::to_string(x.cols()) + " features, state has " +
                     std::to_string(min.size()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double range = max[j] - min[j];
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out(i, j) = range > 0.0 ? (x(i, j) - min[j]) / range : 0.0;
    }
  }
  return out;
}

Dataset parse_csv(const std::string& text, const std::string& label_column,
                  const std::string& source_tag) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
    line_numbers.push_back(line_no);
  }
  if (rows.empty()) throw DataError(source_tag + ": empty CSV");

  std::vector<std::string> header;
  const bool has_header = std::any_of(rows.front().begin(), rows.front().end(),
                                      [](const std::string& c) { return !parse_number(c); });
  if (has_header) {
    header = rows.front();
    rows.erase(rows.begin());
    line_numbers.erase(line_numbers.begin());
  }
  if (rows.empty()) throw DataError(source_tag + ": CSV has a header but no data rows");

  const std::size_t width = has_header ? header.size() : rows.front().size();
  if (width < 2) throw DataError(source_tag + ": need at least one feature and a label column");

  std::size_t label_idx = width - 1;
  if (!label_column.empty()) {
    auto it = std::find(header.begin(), header.end(), label_column);
    if (it != header.end()) {
      label_idx = static_cast<std::size_t>(it - header.begin());
    } else if (auto idx = parse_number(label_column);
               idx && *idx >= 0 && std::floor(*idx) == *idx && *idx < static_cast<double>(width)) {
      label_idx = static_cast<std::size_t>(*idx);
    } else {
      throw DataError(source_tag + ": label column '" + label_column + "' not found");
    }
  }

  Dataset data;
  data.source_tag = source_tag;
  std::vector<double> values;
  values.reserve(rows.size() * (width - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& cells = rows[r];
    const std::string where = source_tag + ": line " + std::to_string(line_numbers[r]);
    if (cells.size() != width) {
      throw DataError(where + ": expected " + std::to_string(width) + " columns, found " +
                      std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < width; ++c) {
      auto v = parse_number(cells[c]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(where + ", column " + std::to_string(c + 1) + ": non-numeric cell '" +
                        cells[c] + "'");
      }
      if (c == label_idx) {
        if (*v != 0.0 && *v != 1.0) {
          throw DataError(where + ", column " + std::to_string(c + 1) + ": illegal label '" +
                          cells[c] + "' (expected 0 or 1)");
        }
        data.labels.push_back(static_cast<int>(*v));
      } else {
        values.push_back(*v);
      }
    }
  }
  data.features = Matrix(rows.size(), width - 1, std::move(values));
  for (std::size_t c = 0; c < width; ++c) {
    if (c == label_idx) continue;
    data.feature_names.push_back(has_header ? header[c] : "x" + std::to_string(c));
  }
  data.validate();
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), label_column, path.string());
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    out += j < data.feature_names.size() ? data.feature_names[j] : "x" + std::to_string(j);
    out += ',';
  }
  out += "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      out += format_double(data.features(i, j));
      out += ',';
    }
    out += std::to_string(data.labels[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file '" + path.string() + "'");
  out << to_csv(data);
}

NormalizedSets normalize_fit_apply(const Dataset& train, const std::vector<Dataset>& others) {
  NormalizedSets out;
  out.state = NormalizerState::fit(train.features);
  out.train = train;
  out.train.features = out.state.apply(train.features);
  for (const auto& o : others) {
    Dataset n = o;
    n.features = out.state.apply(o.features);
    out.others.push_back(std::move(n));
  }
  return out;
}

Split split(const Dataset& data, double train_fraction, std::uint64_t seed, bool stratified) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must be in (0, 1)");
  }
  data.validate();
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  SeededRng rng(seed);

  std::vector<std::size_t> train_idx, test_idx;
  if (!stratified) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    rng.shuffle(std::span<std::size_t>(all));
    train_idx.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.assign(all.begin() + static_cast<std::ptrdiff_t>(n_train), all.end());
  } else {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (data.labels[i] == 1 ? pos : neg).push_back(i);
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));
    auto pos_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(pos.size()) * train_fraction));
    pos_train = std::min({pos_train, pos.size(), n_train});
    const std::size_t neg_train = std::min(n_train - pos_train, neg.size());
    if (pos_train == 0 || neg_train == 0) {
      throw DataError("split: stratified split leaves the " +
                      std::string(pos_train == 0 ? "anomaly" : "normal") +
                      " class with no training samples");
    }
    train_idx.assign(pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(pos_train));
    train_idx.insert(train_idx.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(neg_train));
    test_idx.assign(pos.begin() + static_cast<std::ptrdiff_t>(pos_train), pos.end());
    test_idx.insert(test_idx.end(), neg.begin() + static_cast<std::ptrdiff_t>(neg_train), neg.end());
    // Interleave classes so that downstream batching does not see sorted labels.
    rng.shuffle(std::span<std::size_t>(train_idx));
    rng.shuffle(std::span<std::size_t>(test_idx));
  }

  Split s;
  s.train = data.subset(train_idx);
  s.test = data.subset(test_idx);
  s.train_indices = std::move(train_idx);
  s.test_indices = std::move(test_idx);
  return s;
}

}  // namespace ealgan
