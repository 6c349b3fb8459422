#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "molforge/grid.hpp"

namespace molforge::io {

inline constexpr int kLayoutVersion = 1;

struct ArchiveMetadata {
  std::vector<std::size_t> shape;
  std::vector<Interval> bounds;
  std::vector<std::string> component_names;
  std::string system;
  std::string solver;
  std::string op;  // operator name
  std::string created;  // ISO-8601 timestamp
  std::map<std::string, double> parameters;

  bool operator==(const ArchiveMetadata&) const = default;
};

/// A gathered, global time slice as stored on disk.
struct StoredSlice {
  double time = 0.0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> data;

  bool operator==(const StoredSlice&) const = default;
};

/// HDF5 time-series archive:
///   /meta                 attributes: layout_version, shape, bounds,
///                         component_names, system, solver, operator,
///                         created, parameter_names, parameter_values
///   /iter/<%08d>          attribute time; one f64 dataset per component
class SimArchive {
 public:
  static SimArchive create(const std::filesystem::path& path, const ArchiveMetadata& meta);
  static SimArchive open(const std::filesystem::path& path);

  SimArchive(SimArchive&&) noexcept;
  SimArchive& operator=(SimArchive&&) noexcept;
  ~SimArchive();

  const ArchiveMetadata& metadata() const noexcept { return meta_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  void write_timeslice(std::int64_t iteration, const StoredSlice& slice);
  StoredSlice read_timeslice(std::int64_t iteration) const;
  std::vector<std::int64_t> list_iterations() const;

  /// Flush and release the file; further calls throw.
  void close();

 private:
  struct Handle;
  SimArchive(std::filesystem::path path, ArchiveMetadata meta, std::unique_ptr<Handle> h,
             bool writable);

  std::filesystem::path path_;
  ArchiveMetadata meta_;
  std::unique_ptr<Handle> handle_;
  bool writable_ = false;
  std::int64_t last_iteration_ = -1;
};

/// Current UTC time as an ISO-8601 string, or SOURCE_DATE_EPOCH when set.
std::string timestamp_now();

}  // namespace molforge::io
