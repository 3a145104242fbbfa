#include "lexprompt/task_data.hpp"

#include <fstream>
#include <numeric>
#include <set>

#include "lexprompt/error.hpp"
#include "lexprompt/rng.hpp"
#include "lexprompt/text.hpp"

namespace lexprompt {

TaskPool::TaskPool(std::string name, std::vector<TaskInstance> instances, Verbalizer verbalizer)
    : name_(std::move(name)), instances_(std::move(instances)), verbalizer_(std::move(verbalizer)) {
  if (instances_.empty()) throw InvalidArgument("task pool '" + name_ + "' is empty");
  std::set<std::string_view> seen;
  for (const auto& inst : instances_) {
    if (!seen.insert(inst.id).second) {
      throw InvalidArgument("duplicate instance id '" + inst.id + "' in pool '" + name_ + "'");
    }
    if (verbalizer_.find(inst.gold) == nullptr) throw LabelMismatch(inst.id, inst.gold);
  }
}

PoolFormat parse_pool_format(std::string_view s) {
  if (s == "jsonl") return PoolFormat::jsonl;
  if (s == "tsv") return PoolFormat::tsv;
  throw ConfigError("unknown pool format '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pool file " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

Verbalizer verbalizer_from_header(const nlohmann::json& h) {
  std::vector<std::string> labels = h.at("labels").get<std::vector<std::string>>();
  const auto policy = parse_match_policy(h.value("match_policy", std::string("first_token")));
  return Verbalizer(std::move(labels), policy);
}

std::vector<TaskInstance> parse_jsonl(const std::vector<std::string>& lines, const std::string& src,
                                      std::optional<Verbalizer>& header_verbalizer,
                                      std::string& header_name) {
  std::vector<TaskInstance> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(src, lineno, e.what());
    }
    if (!j.is_object()) throw ParseError(src, lineno, "record is not an object");
    if (j.contains("header")) {
      if (!out.empty() || header_verbalizer) {
        throw ParseError(src, lineno, "header must be the first record");
      }
      try {
        header_verbalizer = verbalizer_from_header(j.at("header"));
        header_name = j.at("header").value("name", std::string{});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(src, lineno, e.what());
      } catch (const InvalidArgument& e) {
        throw ParseError(src, lineno, e.what());
      }
      continue;
    }
    TaskInstance inst;
    try {
      inst.id = j.at("id").get<std::string>();
      inst.gold = j.at("gold").get<std::string>();
      for (const auto& [k, v] : j.at("slots").items()) inst.slots.emplace(k, v.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(src, lineno, e.what());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::vector<TaskInstance> parse_tsv(const std::vector<std::string>& lines, const std::string& src) {
  std::size_t header_line = 0;
  while (header_line < lines.size() && trim(lines[header_line]).empty()) ++header_line;
  if (header_line == lines.size()) throw ParseError(src, 1, "missing header row");
  const auto columns = split_tabs(lines[header_line]);
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> gold_col;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == "id") id_col = c;
    if (columns[c] == "gold") gold_col = c;
  }
  if (!gold_col) throw ParseError(src, header_line + 1, "header has no 'gold' column");

  std::vector<TaskInstance> out;
  for (std::size_t i = header_line + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != columns.size()) {
      throw ParseError(src, i + 1,
                       "expected " + std::to_string(columns.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    TaskInstance inst;
    inst.id = id_col ? fields[*id_col] : "row" + std::to_string(out.size() + 1);
    inst.gold = fields[*gold_col];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c != *gold_col && (!id_col || c != *id_col)) inst.slots.emplace(columns[c], fields[c]);
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

TaskPool load_pool(const std::filesystem::path& path, PoolFormat format,
                   std::optional<Verbalizer> verbalizer, std::string name) {
  const auto lines = read_lines(path);
  const auto src = path.string();
  std::optional<Verbalizer> header_verbalizer;
  std::string header_name;
  auto instances = format == PoolFormat::jsonl
                       ? parse_jsonl(lines, src, header_verbalizer, header_name)
                       : parse_tsv(lines, src);

  if (header_verbalizer && verbalizer && !(*header_verbalizer == *verbalizer)) {
    throw ConfigError("pool " + src + ": file header labels disagree with configured labels");
  }
  if (!verbalizer) verbalizer = std::move(header_verbalizer);
  if (!verbalizer) throw ConfigError("pool " + src + " has no verbalizer labels");
  if (name.empty()) name = header_name.empty() ? path.stem().string() : header_name;
  return TaskPool(std::move(name), std::move(instances), std::move(*verbalizer));
}

ReferenceBatch sample_reference(const TaskPool& pool, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgument("reference batch size must be at least 1");
  if (n > pool.size()) throw BatchTooLarge(n, pool.size());
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed);
  rng.partial_shuffle(std::span(order), n);

  ReferenceBatch batch{pool.name(), seed, {}};
  batch.instances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.instances.push_back(pool.instances()[order[i]]);
  return batch;
}

}  // namespace lexprompt
