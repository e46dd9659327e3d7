// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/ingest.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "scalelab/error.hpp"

namespace scalelab {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void parse_error(std::string_view origin, std::size_t line, std::size_t column,
                              const std::string& what, const std::string& subject = {}) {
  raise(ErrorCode::kParseError,
        std::string(origin) + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what,
        subject);
}

struct Cell {
  std::string text;
  std::size_t column;  // 1-based
};

// Splits one CSV record. Quoted fields may contain commas and doubled quotes.
std::vector<Cell> split_record(std::string_view line, std::string_view origin, std::size_t line_no) {
  std::vector<Cell> cells;
  std::size_t i = 0;
  while (true) {
    Cell cell{{}, i + 1};
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) parse_error(origin, line_no, cell.column, "unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            cell.text += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        cell.text += line[i++];
      }
      if (i < line.size() && line[i] != ',') parse_error(origin, line_no, i + 1, "expected ',' after quoted field");
    } else {
      while (i < line.size() && line[i] != ',') cell.text += line[i++];
    }
    cells.push_back(std::move(cell));
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return cells;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Header-driven row access with positioned diagnostics.
class Row {
 public:
  Row(const std::vector<Cell>& cells, const std::map<std::string, std::size_t>& index,
      std::string_view origin, std::size_t line)
      : cells_(cells), index_(index), origin_(origin), line_(line) {}

  bool has(const std::string& name) const { return index_.count(name) != 0; }

  std::string text(const std::string& name) const { return std::string(trim(cell(name).text)); }

  double number(const std::string& name) const {
    const Cell& c = cell(name);
    const auto v = parse_double(c.text);
    if (!v) parse_error(origin_, line_, c.column, name + ": expected a number, got '" + c.text + "'", name);
    return *v;
  }

  std::optional<double> optional_number(const std::string& name) const {
    if (!has(name) || is_blank(cell(name).text)) return std::nullopt;
    return number(name);
  }

  std::size_t column(const std::string& name) const { return cell(name).column; }

 private:
  const Cell& cell(const std::string& name) const { return cells_[index_.at(name)]; }

  const std::vector<Cell>& cells_;
  const std::map<std::string, std::size_t>& index_;
  std::string_view origin_;
  std::size_t line_;
};

std::map<std::string, std::size_t> header_index(const std::vector<Cell>& header,
                                                std::span<const std::string_view> required,
                                                std::string_view origin) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(trim(header[i].text));
    if (!index.emplace(name, i).second) parse_error(origin, 1, header[i].column, "duplicate column '" + name + "'");
  }
  for (std::string_view col : required) {
    if (!index.count(std::string(col))) {
      parse_error(origin, 1, 1, "missing required column '" + std::string(col) + "'", std::string(col));
    }
  }
  return index;
}

template <class Fn>
auto with_row_context(const std::string& run_id, std::size_t line, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInvariantViolation) throw;
    raise(e.code(), "run '" + run_id + "' (line " + std::to_string(line) + "): " + e.what(), e.subject());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote_csv(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---- fit JSON ----

double get_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    raise(ErrorCode::kParseError, std::string("missing numeric field '") + key + "'", key);
  }
  return it->get<double>();
}

json to_json(const PowerLawFit& law) {
  return {{"k", law.k}, {"p", law.p}, {"x_min", law.x_min}, {"x_max", law.x_max}, {"r_squared", law.r_squared}};
}

PowerLawFit power_law_from(const json& j) {
  if (!j.is_object()) raise(ErrorCode::kParseError, "power law must be an object");
  PowerLawFit law{get_number(j, "k"), get_number(j, "p"), get_number(j, "x_min"), get_number(j, "x_max"),
                  get_number(j, "r_squared")};
  validate(law);
  return law;
}

const json& member(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) raise(ErrorCode::kParseError, std::string("missing field '") + key + "'", key);
  return *it;
}

bool get_bool(const json& j, const char* key) {
  const json& v = member(j, key);
  if (!v.is_boolean()) raise(ErrorCode::kParseError, std::string("field '") + key + "' must be boolean", key);
  return v.get<bool>();
}

struct JsonWriter {
  json operator()(const LossSurfaceFit& f) const {
    return {{"kind", "loss_surface"},        {"e_irreducible", f.e_irreducible},
            {"a_coef", f.a_coef},            {"b_coef", f.b_coef},
            {"alpha", f.alpha},              {"beta", f.beta},
            {"objective", f.objective},      {"winning_init_index", f.winning_init_index},
            {"converged", f.converged},      {"huber_delta", f.huber_delta}};
  }
  json operator()(const SparseLossSurfaceFit& f) const {
    return {{"kind", "sparse_loss_surface"},
            {"e_irr", f.e_irr},
            {"a_coef", f.a_coef},
            {"b_coef", f.b_coef},
            {"alpha", f.alpha},
            {"beta", f.beta},
            {"lam", f.lam},
            {"delta_s", f.delta_s},
            {"gamma", f.gamma},
            {"c_coef", f.c_coef},
            {"d_coef", f.d_coef},
            {"objective", f.objective},
            {"converged", f.converged}};
  }
  json operator()(const FrontierLaws& f) const {
    return {{"kind", "frontier"},
            {"source", std::string(to_string(f.source))},
            {"n_of_c", to_json(f.n_of_c)},
            {"d_of_c", to_json(f.d_of_c)},
            {"d_of_n", to_json(f.d_of_n)},
            {"ratio_of_c", to_json(f.ratio_of_c)}};
  }
  json operator()(const PowerLawFit& f) const {
    json j = to_json(f);
    j["kind"] = "power_law";
    return j;
  }
};

FitDocument document_from(const json& j) {
  if (!j.is_object()) raise(ErrorCode::kParseError, "fit document must be a JSON object");
  const auto schema = j.find("schema");
  if (schema == j.end() || !schema->is_string()) {
    raise(ErrorCode::kSchemaMismatch, "fit document lacks a schema field", "schema");
  }
  if (schema->get<std::string>() != kFitSchema) {
    raise(ErrorCode::kSchemaMismatch,
          "unsupported schema '" + schema->get<std::string>() + "', expected '" + std::string(kFitSchema) + "'",
          "schema");
  }
  const json& kind_field = member(j, "kind");
  if (!kind_field.is_string()) raise(ErrorCode::kParseError, "kind must be a string", "kind");
  const std::string kind = kind_field.get<std::string>();
  if (kind == "loss_surface") {
    LossSurfaceFit f;
    f.e_irreducible = get_number(j, "e_irreducible");
    f.a_coef = get_number(j, "a_coef");
    f.b_coef = get_number(j, "b_coef");
    f.alpha = get_number(j, "alpha");
    f.beta = get_number(j, "beta");
    f.objective = get_number(j, "objective");
    const json& idx = member(j, "winning_init_index");
    if (!idx.is_number_integer()) raise(ErrorCode::kParseError, "winning_init_index must be an integer");
    f.winning_init_index = idx.get<int>();
    f.converged = get_bool(j, "converged");
    f.huber_delta = get_number(j, "huber_delta");
    validate(f);
    return f;
  }
  if (kind == "sparse_loss_surface") {
    SparseLossSurfaceFit f;
    f.e_irr = get_number(j, "e_irr");
    f.a_coef = get_number(j, "a_coef");
    f.b_coef = get_number(j, "b_coef");
    f.alpha = get_number(j, "alpha");
    f.beta = get_number(j, "beta");
    f.lam = get_number(j, "lam");
    f.delta_s = get_number(j, "delta_s");
    f.gamma = get_number(j, "gamma");
    f.c_coef = get_number(j, "c_coef");
    f.d_coef = get_number(j, "d_coef");
    f.objective = get_number(j, "objective");
    f.converged = get_bool(j, "converged");
    validate(f);
    return f;
  }
  if (kind == "frontier") {
    FrontierLaws f;
    const json& src = member(j, "source");
    if (!src.is_string()) raise(ErrorCode::kParseError, "source must be a string", "source");
    f.source = parse_frontier_source(src.get<std::string>());
    f.n_of_c = power_law_from(member(j, "n_of_c"));
    f.d_of_c = power_law_from(member(j, "d_of_c"));
    f.d_of_n = power_law_from(member(j, "d_of_n"));
    f.ratio_of_c = power_law_from(member(j, "ratio_of_c"));
    validate(f);
    return f;
  }
  if (kind == "power_law") return power_law_from(j);
  raise(ErrorCode::kSchemaMismatch, "unknown fit kind '" + kind + "'", "kind");
}

std::uint64_t parse_count(const Row& row, const std::string& name, std::string_view origin, std::size_t line) {
  const double v = row.number(name);
  if (v < 0 || v != std::floor(v) || v >= 18446744073709551616.0) {
    parse_error(origin, line, row.column(name), name + ": expected a non-negative integer count", name);
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

std::vector<RunRecord> parse_runs_csv(std::string_view text, const RunCsvOptions& options) {
  static constexpr std::string_view kRequired[] = {"run_id", "arch",     "n_active", "n_total", "tokens",
                                                   "mixture", "eval_set", "loss"};
  const std::string_view origin = options.origin;
  const auto lines = split_lines(text);
  if (lines.empty() || is_blank(lines.front())) parse_error(origin, 1, 1, "missing header row");
  std::string_view header_line = lines.front();
  if (header_line.substr(0, 3) == "\xEF\xBB\xBF") header_line.remove_prefix(3);
  const auto index = header_index(split_record(header_line, origin, 1), kRequired, origin);
  if (options.require_figure && !index.count("figure")) {
    parse_error(origin, 1, 1, "fixture lacks the 'figure' provenance column", "figure");
  }

  std::vector<RunRecord> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (is_blank(lines[li])) continue;
    const auto cells = split_record(lines[li], origin, line_no);
    if (cells.size() != index.size()) {
      parse_error(origin, line_no, 1,
                  "expected " + std::to_string(index.size()) + " fields, found " + std::to_string(cells.size()));
    }
    const Row row(cells, index, origin, line_no);
    RunFields f;
    f.run_id = row.text("run_id");
    try {
      f.arch = parse_arch(row.text("arch"));
      f.eval_set = parse_eval_set(row.text("eval_set"));
    } catch (const Error& e) {
      const std::string col = std::string(e.subject());
      parse_error(origin, line_no, row.column(col.empty() ? "arch" : col), e.what(), col);
    }
    f.n_active = row.number("n_active");
    f.n_total = row.number("n_total");
    f.n_vision = row.optional_number("n_vision");
    f.tokens = row.number("tokens");
    f.vision_token_fraction = row.optional_number("vision_token_fraction");
    f.mixture = row.text("mixture");
    f.loss = row.number("loss");
    if (options.require_figure && row.text("figure").empty()) {
      parse_error(origin, line_no, row.column("figure"), "figure: provenance label is empty", "figure");
    }
    out.push_back(with_row_context(f.run_id, line_no, [&] { return RunRecord(f); }));
  }
  return out;
}

std::vector<RunRecord> parse_runs_json(std::string_view text, std::string_view origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::kParseError, std::string(origin) + ": " + e.what());
  }
  if (!doc.is_array()) raise(ErrorCode::kParseError, std::string(origin) + ": expected a JSON array of runs");
  std::vector<RunRecord> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string where = std::string(origin) + ": run #" + std::to_string(i + 1);
    if (!item.is_object()) raise(ErrorCode::kParseError, where + " is not an object");
    auto text_field = [&](const char* key) {
      const auto it = item.find(key);
      if (it == item.end() || !it->is_string()) raise(ErrorCode::kParseError, where + ": missing string '" + key + "'", key);
      return it->get<std::string>();
    };
    auto num_field = [&](const char* key) {
      const auto it = item.find(key);
      if (it == item.end() || !it->is_number()) raise(ErrorCode::kParseError, where + ": missing number '" + key + "'", key);
      return it->get<double>();
    };
    auto opt_field = [&](const char* key) -> std::optional<double> {
      const auto it = item.find(key);
      if (it == item.end() || it->is_null()) return std::nullopt;
      if (!it->is_number()) raise(ErrorCode::kParseError, where + ": '" + key + "' must be a number", key);
      return it->get<double>();
    };
    RunFields f;
    f.run_id = text_field("run_id");
    f.arch = parse_arch(text_field("arch"));
    f.n_active = num_field("n_active");
    f.n_total = num_field("n_total");
    f.n_vision = opt_field("n_vision");
    f.tokens = num_field("tokens");
    f.vision_token_fraction = opt_field("vision_token_fraction");
    f.mixture = text_field("mixture");
    f.eval_set = parse_eval_set(text_field("eval_set"));
    f.loss = num_field("loss");
    out.push_back(with_row_context(f.run_id, i + 1, [&] { return RunRecord(f); }));
  }
  return out;
}

std::vector<RunRecord> load_runs(const std::filesystem::path& path, std::optional<RunFormat> format) {
  const std::string text = read_file(path);
  const RunFormat fmt = format.value_or(path.extension() == ".json" ? RunFormat::kJson : RunFormat::kCsv);
  std::vector<RunRecord> runs = fmt == RunFormat::kJson
                                    ? parse_runs_json(text, path.string())
                                    : parse_runs_csv(text, {.require_figure = false, .origin = path.string()});
  validate_dataset(runs);
  return runs;
}

std::vector<RunRecord> load_fixture(const std::filesystem::path& path) {
  std::vector<RunRecord> runs = parse_runs_csv(read_file(path), {.require_figure = true, .origin = path.string()});
  validate_dataset(runs);
  return runs;
}

std::string runs_to_csv(std::span<const RunRecord> runs) {
  std::ostringstream out;
  out << kRunCsvHeader << '\n';
  for (const RunRecord& r : runs) {
    const RunFields& f = r.fields();
    out << quote_csv(f.run_id) << ',' << to_string(f.arch) << ',' << format_double(f.n_active) << ','
        << format_double(f.n_total) << ',' << (f.n_vision ? format_double(*f.n_vision) : "") << ','
        << format_double(f.tokens) << ','
        << (f.vision_token_fraction ? format_double(*f.vision_token_fraction) : "") << ','
        << quote_csv(f.mixture) << ',' << to_string(f.eval_set) << ',' << format_double(f.loss) << ",\n";
  }
  return out.str();
}

std::string fit_to_json(const FitDocument& fit) {
  std::visit([](const auto& f) { validate(f); }, fit);
  json j = std::visit(JsonWriter{}, fit);
  json doc = {{"schema", kFitSchema}};
  doc.update(j);
  return doc.dump(2) + "\n";
}

FitDocument fit_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::kParseError, e.what());
  }
  return document_from(j);
}

void save_fit(const FitDocument& fit, const std::filesystem::path& path) { write_file(path, fit_to_json(fit)); }

FitDocument load_fit(const std::filesystem::path& path) {
  try {
    return fit_from_json(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    raise(e.code(), path.string() + ": " + e.what(), e.subject());
  }
}

template <class T>
T load_fit_as(const std::filesystem::path& path) {
  FitDocument doc = load_fit(path);
  if (auto* v = std::get_if<T>(&doc)) return *v;
  raise(ErrorCode::kSchemaMismatch, path.string() + ": fit document has a different kind", "kind");
}

template LossSurfaceFit load_fit_as<LossSurfaceFit>(const std::filesystem::path&);
template SparseLossSurfaceFit load_fit_as<SparseLossSurfaceFit>(const std::filesystem::path&);
template FrontierLaws load_fit_as<FrontierLaws>(const std::filesystem::path&);
template PowerLawFit load_fit_as<PowerLawFit>(const std::filesystem::path&);

std::vector<AssignmentTable> parse_assignments_csv(std::string_view text, std::string_view origin) {
  static constexpr std::string_view kRequired[] = {"layer", "expert", "text_tokens", "image_tokens", "source"};
  const auto lines = split_lines(text);
  if (lines.empty() || is_blank(lines.front())) parse_error(origin, 1, 1, "missing header row");
  const auto index = header_index(split_record(lines.front(), origin, 1), kRequired, origin);

  struct Pending {
    std::map<std::pair<std::size_t, std::size_t>, ExpertCounts> cells;
    std::size_t layers = 0;
    std::size_t experts = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Pending> sources;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t line_no = li + 1;
    if (is_blank(lines[li])) continue;
    const auto cells = split_record(lines[li], origin, line_no);
    if (cells.size() != index.size()) parse_error(origin, line_no, 1, "wrong number of fields");
    const Row row(cells, index, origin, line_no);
    const auto layer = static_cast<std::size_t>(parse_count(row, "layer", origin, line_no));
    const auto expert = static_cast<std::size_t>(parse_count(row, "expert", origin, line_no));
    const ExpertCounts counts{parse_count(row, "text_tokens", origin, line_no),
                              parse_count(row, "image_tokens", origin, line_no)};
    const std::string source = row.text("source");
    auto [it, inserted] = sources.try_emplace(source);
    if (inserted) order.push_back(source);
    Pending& p = it->second;
    if (!p.cells.emplace(std::make_pair(layer, expert), counts).second) {
      parse_error(origin, line_no, row.column("layer"), "duplicate (layer, expert) cell for source '" + source + "'");
    }
    p.layers = std::max(p.layers, layer + 1);
    p.experts = std::max(p.experts, expert + 1);
  }
  if (order.empty()) raise(ErrorCode::kEmptyDataset, std::string(origin) + ": no assignment rows");
  std::vector<AssignmentTable> tables;
  for (const std::string& source : order) {
    Pending& p = sources[source];
    std::vector<ExpertCounts> counts;
    counts.reserve(p.layers * p.experts);
    for (std::size_t l = 0; l < p.layers; ++l) {
      for (std::size_t e = 0; e < p.experts; ++e) {
        const auto it = p.cells.find({l, e});
        if (it == p.cells.end()) {
          raise(ErrorCode::kInvariantViolation,
                "counts: source '" + source + "' lacks layer " + std::to_string(l) + " expert " + std::to_string(e),
                "counts");
        }
        counts.push_back(it->second);
      }
    }
    tables.emplace_back(source, p.layers, p.experts, std::move(counts));
  }
  return tables;
}

std::vector<AssignmentTable> load_assignments(const std::filesystem::path& path) {
  return parse_assignments_csv(read_file(path), path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::kIoError, "cannot open '" + path.string() + "'", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::kIoError, "cannot write '" + path.string() + "'", path.string());
  out << contents;
  if (!out.flush()) raise(ErrorCode::kIoError, "write failed for '" + path.string() + "'", path.string());
}

}  // namespace scalelab
