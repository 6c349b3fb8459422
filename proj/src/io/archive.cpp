#include <hdf5.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <numeric>
#include <string>
#include <utility>

#include "molforge/error.hpp"
#include "molforge/io.hpp"

namespace molforge::io {

namespace {

// Owning hid_t with the matching close routine.
class Hid {
 public:
  using Closer = herr_t (*)(hid_t);
  Hid() = default;
  Hid(hid_t id, Closer closer) : id_(id), closer_(closer) {}
  Hid(Hid&& o) noexcept : id_(std::exchange(o.id_, -1)), closer_(o.closer_) {}
  Hid& operator=(Hid&& o) noexcept {
    if (this != &o) {
      reset();
      id_ = std::exchange(o.id_, -1);
      closer_ = o.closer_;
    }
    return *this;
  }
  ~Hid() { reset(); }
  Hid(const Hid&) = delete;
  Hid& operator=(const Hid&) = delete;

  hid_t get() const noexcept { return id_; }
  explicit operator bool() const noexcept { return id_ >= 0; }
  void reset() {
    if (id_ >= 0 && closer_) closer_(id_);
    id_ = -1;
  }

 private:
  hid_t id_ = -1;
  Closer closer_ = nullptr;
};

Hid checked(hid_t id, Hid::Closer closer, const std::string& what) {
  if (id < 0) throw ArchiveError("HDF5: " + what);
  return Hid(id, closer);
}

void check(herr_t status, const std::string& what) {
  if (status < 0) throw ArchiveError("HDF5: " + what);
}

// Library-wide: errors become exceptions, not stderr noise.
void silence_hdf5() {
  static const bool once = [] {
    H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr);
    return true;
  }();
  (void)once;
}

Hid untimed_group_plist() {
  Hid p = checked(H5Pcreate(H5P_GROUP_CREATE), H5Pclose, "group plist");
  check(H5Pset_obj_track_times(p.get(), false), "disable time tracking");
  return p;
}

Hid untimed_dataset_plist() {
  Hid p = checked(H5Pcreate(H5P_DATASET_CREATE), H5Pclose, "dataset plist");
  check(H5Pset_obj_track_times(p.get(), false), "disable time tracking");
  return p;
}

Hid make_group(hid_t parent, const std::string& name) {
  Hid gcpl = untimed_group_plist();
  return checked(H5Gcreate2(parent, name.c_str(), H5P_DEFAULT, gcpl.get(), H5P_DEFAULT),
                 H5Gclose, "create group " + name);
}

Hid open_group(hid_t parent, const std::string& name) {
  return checked(H5Gopen2(parent, name.c_str(), H5P_DEFAULT), H5Gclose, "open group " + name);
}

template <typename T>
void write_array_attr(hid_t loc, const std::string& name, hid_t file_type, hid_t mem_type,
                      const std::vector<T>& values) {
  const hsize_t dims[1] = {values.size()};
  Hid space = values.empty() ? checked(H5Screate(H5S_NULL), H5Sclose, "dataspace")
                             : checked(H5Screate_simple(1, dims, nullptr), H5Sclose, "dataspace");
  Hid attr = checked(H5Acreate2(loc, name.c_str(), file_type, space.get(), H5P_DEFAULT, H5P_DEFAULT),
                     H5Aclose, "create attribute " + name);
  if (!values.empty()) check(H5Awrite(attr.get(), mem_type, values.data()), "write " + name);
}

template <typename T>
std::vector<T> read_array_attr(hid_t loc, const std::string& name, hid_t mem_type) {
  Hid attr = checked(H5Aopen(loc, name.c_str(), H5P_DEFAULT), H5Aclose, "missing attribute " + name);
  Hid space = checked(H5Aget_space(attr.get()), H5Sclose, "attribute space");
  const hssize_t n = H5Sget_simple_extent_npoints(space.get());
  if (n < 0) throw ArchiveError("HDF5: bad extent for " + name);
  std::vector<T> values(static_cast<std::size_t>(n));
  if (n > 0) check(H5Aread(attr.get(), mem_type, values.data()), "read " + name);
  return values;
}

void write_strings_attr(hid_t loc, const std::string& name, const std::vector<std::string>& values) {
  Hid type = checked(H5Tcopy(H5T_C_S1), H5Tclose, "string type");
  check(H5Tset_size(type.get(), H5T_VARIABLE), "variable string");
  check(H5Tset_cset(type.get(), H5T_CSET_UTF8), "utf8");
  std::vector<const char*> ptrs;
  for (const auto& s : values) ptrs.push_back(s.c_str());
  write_array_attr(loc, name, type.get(), type.get(), ptrs);
}

std::vector<std::string> read_strings_attr(hid_t loc, const std::string& name) {
  Hid attr = checked(H5Aopen(loc, name.c_str(), H5P_DEFAULT), H5Aclose, "missing attribute " + name);
  Hid space = checked(H5Aget_space(attr.get()), H5Sclose, "attribute space");
  const hssize_t n = H5Sget_simple_extent_npoints(space.get());
  if (n <= 0) return {};
  Hid type = checked(H5Tcopy(H5T_C_S1), H5Tclose, "string type");
  check(H5Tset_size(type.get(), H5T_VARIABLE), "variable string");
  check(H5Tset_cset(type.get(), H5T_CSET_UTF8), "utf8");
  std::vector<char*> raw(static_cast<std::size_t>(n), nullptr);
  check(H5Aread(attr.get(), type.get(), raw.data()), "read " + name);
  std::vector<std::string> out;
  for (char* p : raw) out.emplace_back(p ? p : "");
  check(H5Dvlen_reclaim(type.get(), space.get(), H5P_DEFAULT, raw.data()), "reclaim strings");
  return out;
}

void write_string_attr(hid_t loc, const std::string& name, const std::string& value) {
  write_strings_attr(loc, name, {value});
}

std::string read_string_attr(hid_t loc, const std::string& name) {
  auto v = read_strings_attr(loc, name);
  if (v.size() != 1) throw LayoutError("attribute " + name + " is not a single string");
  return v.front();
}

std::string iteration_name(std::int64_t iteration) {
  if (iteration < 0 || iteration > 99'999'999)
    throw ArchiveError("iteration " + std::to_string(iteration) + " out of range");
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lld", static_cast<long long>(iteration));
  return buf;
}

bool link_exists(hid_t loc, const std::string& name) {
  return H5Lexists(loc, name.c_str(), H5P_DEFAULT) > 0;
}

}  // namespace

struct SimArchive::Handle {
  Hid file;
};

SimArchive::SimArchive(std::filesystem::path path, ArchiveMetadata meta, std::unique_ptr<Handle> h,
                       bool writable)
    : path_(std::move(path)), meta_(std::move(meta)), handle_(std::move(h)), writable_(writable) {}

SimArchive::SimArchive(SimArchive&&) noexcept = default;
SimArchive& SimArchive::operator=(SimArchive&&) noexcept = default;
SimArchive::~SimArchive() = default;

void SimArchive::close() { handle_.reset(); }

SimArchive SimArchive::create(const std::filesystem::path& path, const ArchiveMetadata& meta) {
  silence_hdf5();
  if (meta.shape.empty() || meta.shape.size() != meta.bounds.size())
    throw ArchiveError("metadata shape and bounds disagree");
  auto h = std::make_unique<Handle>();
  h->file = checked(H5Fcreate(path.c_str(), H5F_ACC_TRUNC, H5P_DEFAULT, H5P_DEFAULT), H5Fclose,
                    "cannot create " + path.string());
  const hid_t f = h->file.get();

  Hid m = make_group(f, "meta");
  write_array_attr(m.get(), "layout_version", H5T_STD_I32LE, H5T_NATIVE_INT,
                   std::vector<int>{kLayoutVersion});
  std::vector<unsigned long long> shape(meta.shape.begin(), meta.shape.end());
  write_array_attr(m.get(), "shape", H5T_STD_U64LE, H5T_NATIVE_ULLONG, shape);
  std::vector<double> bounds;
  for (const auto& b : meta.bounds) {
    bounds.push_back(b.lo);
    bounds.push_back(b.hi);
  }
  write_array_attr(m.get(), "bounds", H5T_IEEE_F64LE, H5T_NATIVE_DOUBLE, bounds);
  write_strings_attr(m.get(), "component_names", meta.component_names);
  write_string_attr(m.get(), "system", meta.system);
  write_string_attr(m.get(), "solver", meta.solver);
  write_string_attr(m.get(), "operator", meta.op);
  write_string_attr(m.get(), "created", meta.created);
  std::vector<std::string> pnames;
  std::vector<double> pvalues;
  for (const auto& [k, v] : meta.parameters) {
    pnames.push_back(k);
    pvalues.push_back(v);
  }
  write_strings_attr(m.get(), "parameter_names", pnames);
  write_array_attr(m.get(), "parameter_values", H5T_IEEE_F64LE, H5T_NATIVE_DOUBLE, pvalues);
  make_group(f, "iter");
  return SimArchive(path, meta, std::move(h), true);
}

SimArchive SimArchive::open(const std::filesystem::path& path) {
  silence_hdf5();
  if (!std::filesystem::exists(path)) throw ArchiveError("no such archive: " + path.string());
  if (H5Fis_hdf5(path.c_str()) <= 0) throw LayoutError(path.string() + " is not an HDF5 archive");
  auto h = std::make_unique<Handle>();
  h->file = checked(H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT), H5Fclose,
                    "cannot open " + path.string());
  const hid_t f = h->file.get();
  if (!link_exists(f, "meta") || !link_exists(f, "iter"))
    throw LayoutError(path.string() + " lacks the /meta and /iter groups");

  ArchiveMetadata meta;
  try {
    Hid m = open_group(f, "meta");
    const auto version = read_array_attr<int>(m.get(), "layout_version", H5T_NATIVE_INT);
    if (version.size() != 1 || version[0] != kLayoutVersion)
      throw LayoutError("unsupported layout version in " + path.string());
    for (auto n : read_array_attr<unsigned long long>(m.get(), "shape", H5T_NATIVE_ULLONG))
      meta.shape.push_back(static_cast<std::size_t>(n));
    const auto b = read_array_attr<double>(m.get(), "bounds", H5T_NATIVE_DOUBLE);
    if (b.size() != 2 * meta.shape.size()) throw LayoutError("bounds do not match shape");
    for (std::size_t i = 0; i < meta.shape.size(); ++i) meta.bounds.push_back({b[2 * i], b[2 * i + 1]});
    meta.component_names = read_strings_attr(m.get(), "component_names");
    meta.system = read_string_attr(m.get(), "system");
    meta.solver = read_string_attr(m.get(), "solver");
    meta.op = read_string_attr(m.get(), "operator");
    meta.created = read_string_attr(m.get(), "created");
    const auto pnames = read_strings_attr(m.get(), "parameter_names");
    const auto pvalues = read_array_attr<double>(m.get(), "parameter_values", H5T_NATIVE_DOUBLE);
    if (pnames.size() != pvalues.size()) throw LayoutError("parameter names and values disagree");
    for (std::size_t i = 0; i < pnames.size(); ++i) meta.parameters[pnames[i]] = pvalues[i];
  } catch (const LayoutError&) {
    throw;
  } catch (const ArchiveError& e) {
    throw LayoutError(path.string() + ": " + e.what());
  }
  SimArchive a(path, std::move(meta), std::move(h), false);
  const auto its = a.list_iterations();
  a.last_iteration_ = its.empty() ? -1 : its.back();
  return a;
}

void SimArchive::write_timeslice(std::int64_t iteration, const StoredSlice& slice) {
  if (!handle_) throw ArchiveError("archive is closed");
  if (!writable_) throw ArchiveError("archive was opened read-only");
  if (iteration <= last_iteration_)
    throw ArchiveError("iteration " + std::to_string(iteration) + " is not after " +
                       std::to_string(last_iteration_));
  if (slice.names != meta_.component_names)
    throw ShapeMismatchError("component names differ from the archive metadata");
  if (slice.data.size() != slice.names.size())
    throw ShapeMismatchError("slice has a different number of names and components");
  const std::size_t points = std::accumulate(meta_.shape.begin(), meta_.shape.end(), std::size_t{1},
                                             std::multiplies<>());
  for (std::size_t c = 0; c < slice.data.size(); ++c)
    if (slice.data[c].size() != points)
      throw ShapeMismatchError("component " + slice.names[c] + " has " +
                               std::to_string(slice.data[c].size()) + " values, grid has " +
                               std::to_string(points));

  Hid iter = open_group(handle_->file.get(), "iter");
  Hid g = make_group(iter.get(), iteration_name(iteration));
  write_array_attr(g.get(), "time", H5T_IEEE_F64LE, H5T_NATIVE_DOUBLE,
                   std::vector<double>{slice.time});
  std::vector<hsize_t> dims(meta_.shape.begin(), meta_.shape.end());
  Hid space = checked(H5Screate_simple(static_cast<int>(dims.size()), dims.data(), nullptr),
                      H5Sclose, "dataspace");
  Hid dcpl = untimed_dataset_plist();
  for (std::size_t c = 0; c < slice.data.size(); ++c) {
    Hid ds = checked(H5Dcreate2(g.get(), slice.names[c].c_str(), H5T_IEEE_F64LE, space.get(),
                                H5P_DEFAULT, dcpl.get(), H5P_DEFAULT),
                     H5Dclose, "create dataset " + slice.names[c]);
    check(H5Dwrite(ds.get(), H5T_NATIVE_DOUBLE, H5S_ALL, H5S_ALL, H5P_DEFAULT,
                   slice.data[c].data()),
          "write dataset " + slice.names[c]);
  }
  check(H5Fflush(handle_->file.get(), H5F_SCOPE_LOCAL), "flush");
  last_iteration_ = iteration;
}

StoredSlice SimArchive::read_timeslice(std::int64_t iteration) const {
  if (!handle_) throw ArchiveError("archive is closed");
  Hid iter = open_group(handle_->file.get(), "iter");
  const std::string name = iteration_name(iteration);
  if (!link_exists(iter.get(), name))
    throw MissingIterationError("iteration " + std::to_string(iteration) + " is not in " +
                                path_.string());
  Hid g = open_group(iter.get(), name);
  StoredSlice out;
  const auto t = read_array_attr<double>(g.get(), "time", H5T_NATIVE_DOUBLE);
  if (t.size() != 1) throw LayoutError("iteration " + name + " has no scalar time");
  out.time = t[0];
  out.names = meta_.component_names;
  const std::size_t points = std::accumulate(meta_.shape.begin(), meta_.shape.end(), std::size_t{1},
                                             std::multiplies<>());
  for (const auto& cname : meta_.component_names) {
    Hid ds = checked(H5Dopen2(g.get(), cname.c_str(), H5P_DEFAULT), H5Dclose,
                     "missing dataset " + cname + " in iteration " + name);
    Hid space = checked(H5Dget_space(ds.get()), H5Sclose, "dataset space");
    if (static_cast<std::size_t>(H5Sget_simple_extent_npoints(space.get())) != points)
      throw ShapeMismatchError("dataset " + cname + " does not match the grid shape");
    std::vector<double> values(points);
    check(H5Dread(ds.get(), H5T_NATIVE_DOUBLE, H5S_ALL, H5S_ALL, H5P_DEFAULT, values.data()),
          "read dataset " + cname);
    out.data.push_back(std::move(values));
  }
  return out;
}

std::vector<std::int64_t> SimArchive::list_iterations() const {
  if (!handle_) throw ArchiveError("archive is closed");
  Hid iter = open_group(handle_->file.get(), "iter");
  std::vector<std::int64_t> out;
  auto visit = [](hid_t, const char* name, const H5L_info_t*, void* data) -> herr_t {
    char* end = nullptr;
    const long long v = std::strtoll(name, &end, 10);
    if (end && *end == '\0') static_cast<std::vector<std::int64_t>*>(data)->push_back(v);
    return 0;
  };
  check(H5Literate(iter.get(), H5_INDEX_NAME, H5_ITER_INC, nullptr, visit, &out), "list iterations");
  return out;
}

std::string timestamp_now() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::atoll(epoch));
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace molforge::io
