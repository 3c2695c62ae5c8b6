#include "sf/pipeline/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sf {

namespace fs = std::filesystem;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io error", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io error", "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("io error", "write failed for '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("format error", path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

nlohmann::json sidecar(const FieldBuffer& f, const Container& c, const Domain& d) {
  const Box s = c.shape_box(d);
  return {{"name", c.name},
          {"dtype", element_name(f.element())},
          {"order", "i-fastest"},
          {"endianness", "little"},
          {"lo", {s.r[0].lo, s.r[1].lo, s.r[2].lo}},
          {"hi", {s.r[0].hi, s.r[1].hi, s.r[2].hi}},
          {"domain", {d.ni, d.nj, d.nk}},
          {"has_k", c.has_k}};
}

}  // namespace

void write_field(const std::string& stem, const FieldBuffer& f, const Container& c, const Domain& d) {
  const Box s = c.shape_box(d);
  std::ofstream out(stem + ".bin", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io error", "cannot write '" + stem + ".bin'");
  for (auto k = s.r[2].lo; k < s.r[2].hi; ++k)
    for (auto j = s.r[1].lo; j < s.r[1].hi; ++j)
      for (auto i = s.r[0].lo; i < s.r[0].hi; ++i) {
        const double v = f.get(i, j, k);
        if (f.element() == ElementType::Float64) {
          out.write(reinterpret_cast<const char*>(&v), sizeof v);
        } else {
          const float x = float(v);
          out.write(reinterpret_cast<const char*>(&x), sizeof x);
        }
      }
  if (!out) throw Error("io error", "write failed for '" + stem + ".bin'");
  write_json(stem + ".json", sidecar(f, c, d));
}

void read_field(const std::string& stem, FieldBuffer& f, const Container& c, const Domain& d) {
  const auto meta = read_json(stem + ".json");
  const auto want = sidecar(f, c, d);
  for (const char* key : {"dtype", "lo", "hi", "has_k"})
    if (meta.value(key, nlohmann::json()) != want[key])
      throw Error("format error", stem + ".json: '" + key + "' does not match the container");
  const Box s = c.shape_box(d);
  std::ifstream in(stem + ".bin", std::ios::binary);
  if (!in) throw Error("io error", "cannot open '" + stem + ".bin'");
  for (auto k = s.r[2].lo; k < s.r[2].hi; ++k)
    for (auto j = s.r[1].lo; j < s.r[1].hi; ++j)
      for (auto i = s.r[0].lo; i < s.r[0].hi; ++i) {
        if (f.element() == ElementType::Float64) {
          double v = 0;
          in.read(reinterpret_cast<char*>(&v), sizeof v);
          f.set(i, j, k, v);
        } else {
          float v = 0;
          in.read(reinterpret_cast<char*>(&v), sizeof v);
          f.set(i, j, k, v);
        }
      }
  if (!in) throw Error("format error", stem + ".bin is shorter than its sidecar says");
  if (in.peek() != std::char_traits<char>::eof())
    throw Error("format error", stem + ".bin is longer than its sidecar says");
}

std::vector<std::string> write_fields(const std::string& dir, const FieldSet& fields, const DataflowGraph& g) {
  fs::create_directories(dir);
  std::vector<std::string> out;
  for (const auto& c : g.arrays) {
    if (c.transient) continue;
    write_field(dir + "/" + c.name, fields.at(c.name), c, g.domain);
    out.push_back(c.name);
  }
  return out;
}

std::string file_digest(const std::string& path) {
  const std::string bytes = read_text(path);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OutputDir::OutputDir(std::string dir, std::string command) : dir_(std::move(dir)), command_(std::move(command)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error("io error", "cannot create '" + dir_ + "': " + ec.message());
}

void OutputDir::add(const std::string& name) {
  if (std::find(artifacts_.begin(), artifacts_.end(), name) == artifacts_.end()) artifacts_.push_back(name);
}

void OutputDir::write(const std::string& name, const std::string& text) {
  write_text(file(name), text);
  add(name);
}

void OutputDir::write(const std::string& name, const nlohmann::json& j) {
  write_json(file(name), j);
  add(name);
}

void OutputDir::finish() const {
  nlohmann::json m = extra_;
  m["command"] = command_;
  m["tool"] = "sflow";
  m["artifacts"] = nlohmann::json::array();
  for (const auto& a : artifacts_) {
    std::error_code ec;
    const auto size = fs::file_size(file(a), ec);
    m["artifacts"].push_back({{"path", a}, {"bytes", ec ? 0 : size}, {"fnv1a", file_digest(file(a))}});
  }
  write_json(file("manifest.json"), m);
}

}  // namespace sf
