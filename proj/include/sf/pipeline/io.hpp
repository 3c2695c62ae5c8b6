#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sf/exec/field.hpp"
#include "sf/ir/graph.hpp"

namespace sf {

std::string read_text(const std::string& path);
/// Writes atomically enough for our purposes: truncate and write.
void write_text(const std::string& path, const std::string& text);

nlohmann::json read_json(const std::string& path);
/// Pretty-printed with a trailing newline; key order is sorted, so equal
/// values give identical bytes.
void write_json(const std::string& path, const nlohmann::json& j);

/// Raw little-endian values of the container shape (halo included, i
/// fastest) in `<stem>.bin` plus a `<stem>.json` sidecar.
void write_field(const std::string& stem, const FieldBuffer& field, const Container& c, const Domain& d);
/// Loads a field written by write_field into a buffer of the same shape.
void read_field(const std::string& stem, FieldBuffer& field, const Container& c, const Domain& d);

/// Writes every non-transient field of the graph under `dir`.
std::vector<std::string> write_fields(const std::string& dir, const FieldSet& fields, const DataflowGraph& g);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

/// Output directory bookkeeping: records artifacts and writes manifest.json.
class OutputDir {
 public:
  OutputDir(std::string dir, std::string command);

  const std::string& path() const { return dir_; }
  std::string file(const std::string& name) const { return dir_ + "/" + name; }

  void add(const std::string& name);  // file already written under the dir
  void write(const std::string& name, const std::string& text);
  void write(const std::string& name, const nlohmann::json& j);
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void finish() const;

 private:
  std::string dir_;
  std::string command_;
  std::vector<std::string> artifacts_;
  nlohmann::json extra_ = nlohmann::json::object();
};

}  // namespace sf
