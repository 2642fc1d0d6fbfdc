#include "nestlog/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace nestlog {

namespace {

using nlohmann::json;

constexpr std::string_view kPartitionColumn = "partition";

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("csv line " + std::to_string(line_no) + ": unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& text) {
  if (text.find_first_of(",\"") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_double(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

json param_json(const ParamSummary& p) {
  return {{"median", p.median}, {"lo", p.lo}, {"hi", p.hi}, {"spike", p.spike}};
}

template <typename T>
T field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw std::runtime_error(std::string("chain file: missing field '") + key + "'");
  return obj.at(key).get<T>();
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), ptr);
}

void write_csv(std::ostream& out, const MaximaDataset& data) {
  const auto& names = data.names();
  for (std::size_t d = 0; d < names.size(); ++d) out << (d ? "," : "") << quote_if_needed(names[d]);
  if (data.has_partitions()) out << "," << kPartitionColumn;
  out << "\n";
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t d = 0; d < data.cols(); ++d) out << (d ? "," : "") << format_double(data(i, d));
    if (data.has_partitions()) out << ",\"" << data.partition(i).to_string() << "\"";
    out << "\n";
  }
}

MaximaDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  auto header = split_csv_line(line, line_no);
  const bool with_partition = !header.empty() && header.back() == kPartitionColumn;
  if (with_partition) header.pop_back();
  if (header.empty()) throw std::runtime_error("csv: no variable columns");
  const std::size_t cols = header.size();
  std::vector<double> values;
  std::vector<TwoLayerTree> partitions;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != cols + (with_partition ? 1 : 0)) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(cols + (with_partition ? 1 : 0)) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (std::size_t d = 0; d < cols; ++d) values.push_back(parse_double(fields[d], line_no));
    if (with_partition) {
      try {
        partitions.push_back(TwoLayerTree::parse(fields.back()));
      } catch (const std::exception& e) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    ++rows;
  }
  try {
    if (with_partition) {
      return MaximaDataset(rows, cols, std::move(values), std::move(partitions), std::move(header));
    }
    return MaximaDataset(rows, cols, std::move(values), std::nullopt, std::move(header));
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("csv: ") + e.what());
  }
}

void write_csv_file(const std::string& path, const MaximaDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, data);
}

MaximaDataset read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

void write_chain(std::ostream& out, const ChainTrace& trace) {
  const auto& h = trace.header;
  const json header = {{"seed", h.seed},
                       {"R", h.iterations},
                       {"burnin", h.burnin},
                       {"eta", h.eta},
                       {"likelihood", to_string(h.likelihood)},
                       {"D", h.dimension},
                       {"names", h.names},
                       {"mode", h.mode}};
  out << header.dump() << "\n";
  for (const auto& rec : trace.records) {
    const json r = {{"iter", rec.iter},
                    {"tree", rec.tree.to_string()},
                    {"alpha0", rec.params.alpha0},
                    {"alphas", rec.params.alphas},
                    {"log_post", rec.log_post},
                    {"move", to_string(rec.move)},
                    {"accepted", rec.accepted}};
    out << r.dump() << "\n";
  }
}

ChainTrace read_chain(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("chain file: empty input");
  ChainTrace trace;
  try {
    const json h = json::parse(line);
    trace.header.seed = field<std::uint64_t>(h, "seed");
    trace.header.iterations = field<std::size_t>(h, "R");
    trace.header.burnin = field<std::size_t>(h, "burnin");
    trace.header.eta = field<double>(h, "eta");
    trace.header.likelihood = parse_likelihood_kind(field<std::string>(h, "likelihood"));
    trace.header.dimension = field<int>(h, "D");
    trace.header.names = field<std::vector<std::string>>(h, "names");
    if (h.contains("mode")) trace.header.mode = h.at("mode").get<std::string>();
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json r = json::parse(line);
      TraceRecord rec;
      rec.iter = field<std::size_t>(r, "iter");
      rec.tree = TwoLayerTree::parse(field<std::string>(r, "tree"));
      rec.params = DependenceParams(field<double>(r, "alpha0"), field<std::vector<double>>(r, "alphas"));
      check_consistent(rec.tree, rec.params);
      rec.log_post = field<double>(r, "log_post");
      rec.move = parse_move_type(field<std::string>(r, "move"));
      rec.accepted = field<bool>(r, "accepted");
      if (rec.tree.dimension() != trace.header.dimension) {
        throw std::runtime_error("chain file line " + std::to_string(line_no) + ": dimension differs from header");
      }
      if (!trace.records.empty() && rec.iter <= trace.records.back().iter) {
        throw std::runtime_error("chain file line " + std::to_string(line_no) + ": iterations not increasing");
      }
      trace.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("chain file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("chain file: ") + e.what());
  } catch (const std::domain_error& e) {
    throw std::runtime_error(std::string("chain file: ") + e.what());
  }
  return trace;
}

void write_chain_file(const std::string& path, const ChainTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_chain(out, trace);
}

ChainTrace read_chain_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_chain(in);
}

std::string summary_json(const PosteriorSummary& summary, int indent) {
  json trees = json::array();
  for (const auto& t : summary.trees) {
    json alphas = json::array();
    for (std::size_t k = 0; k < t.alphas.size(); ++k) {
      json entry = param_json(t.alphas[k]);
      // A singleton's alpha cancels from the likelihood and only follows its prior.
      entry["identified"] = t.tree.cluster_size(static_cast<int>(k)) > 1;
      alphas.push_back(entry);
    }
    json within = json::array();
    for (const auto& p : t.within) within.push_back(param_json(p));
    trees.push_back({{"tree", t.tree.to_string()},
                     {"prob", t.prob},
                     {"count", t.count},
                     {"alpha0", param_json(t.alpha0)},
                     {"alphas", alphas},
                     {"within", within}});
  }
  const json out = {{"trees", trees}, {"n_records", summary.n_records}};
  return out.dump(indent);
}

}  // namespace nestlog
