#include <bit>
#include <cstring>
#include <limits>
#include <string>

#include "molforge/comm.hpp"
#include "molforge/error.hpp"

namespace molforge::comm {

static_assert(std::endian::native == std::endian::little,
              "wire codec assumes a little-endian host");

namespace {

template <typename T>
void put(Frame& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(std::span<const std::byte> in, std::size_t at) {
  T value;
  std::memcpy(&value, in.data() + at, sizeof(T));
  return value;
}

std::size_t inner_size(const Subdomain& sub) {
  std::size_t n = 1;
  for (std::size_t d = 1; d < sub.extent.size(); ++d) n *= sub.extent[d];
  return n;
}

}  // namespace

Frame encode(const HaloMessage& msg) {
  if (msg.values.size() > std::numeric_limits<std::uint32_t>::max())
    throw ProtocolError("halo strip too large for the wire format");
  Frame out;
  out.reserve(kHeaderBytes + msg.values.size() * sizeof(double));
  put(out, msg.source);
  put(out, msg.dimension);
  put(out, msg.side);
  put(out, static_cast<std::uint32_t>(msg.values.size()));
  const auto* p = reinterpret_cast<const std::byte*>(msg.values.data());
  out.insert(out.end(), p, p + msg.values.size() * sizeof(double));
  return out;
}

std::size_t payload_bytes(std::span<const std::byte> header) {
  if (header.size() < kHeaderBytes) throw ProtocolError("truncated frame header");
  return std::size_t{get<std::uint32_t>(header, 6)} * sizeof(double);
}

HaloMessage decode(std::span<const std::byte> frame) {
  const std::size_t body = payload_bytes(frame);
  if (frame.size() != kHeaderBytes + body)
    throw ProtocolError("frame length " + std::to_string(frame.size()) + " does not match header");
  HaloMessage msg;
  msg.source = get<std::uint32_t>(frame, 0);
  msg.dimension = get<std::uint8_t>(frame, 4);
  msg.side = get<std::uint8_t>(frame, 5);
  msg.values.resize(body / sizeof(double));
  std::memcpy(msg.values.data(), frame.data() + kHeaderBytes, body);
  return msg;
}

void WorkerTopology::send(int dest, const HaloMessage& msg) { transport_->send(dest, encode(msg)); }

HaloMessage WorkerTopology::receive(int source, std::uint8_t dimension, std::uint8_t side) {
  const auto key = std::make_tuple(source, dimension, side);
  if (auto it = pending_.find(key); it != pending_.end() && !it->second.empty()) {
    HaloMessage msg = std::move(it->second.front());
    it->second.erase(it->second.begin());
    return msg;
  }
  for (;;) {
    HaloMessage msg = decode(transport_->receive(source));
    if (static_cast<int>(msg.source) != source)
      throw ProtocolError("frame from rank " + std::to_string(source) + " claims source " +
                          std::to_string(msg.source));
    if (msg.dimension == dimension && msg.side == side) return msg;
    pending_[std::make_tuple(source, msg.dimension, msg.side)].push_back(std::move(msg));
  }
}

std::size_t padded_size(const Subdomain& sub) {
  return (sub.ghosts(0, Side::Left) + sub.extent[0] + sub.ghosts(0, Side::Right)) *
         inner_size(sub);
}

void exchange_halos(WorkerTopology& topo, const Subdomain& sub, std::span<double> field) {
  if (field.size() != padded_size(sub))
    throw ProtocolError("field has " + std::to_string(field.size()) + " values, subdomain needs " +
                        std::to_string(padded_size(sub)));
  const std::size_t inner = inner_size(sub);
  const std::size_t gl = sub.ghosts(0, Side::Left);
  const std::size_t gr = sub.ghosts(0, Side::Right);
  const std::size_t n = sub.extent[0];
  const auto me = static_cast<std::uint32_t>(topo.rank());

  // Left edge first, then right edge.
  for (Side side : {Side::Left, Side::Right}) {
    const auto nb = sub.neighbour(0, side);
    if (!nb || sub.is_external(0, side)) continue;
    const std::size_t width = sub.spec.at(0, side).boundary_points;
    if (width > n) throw ProtocolError("boundary strip wider than owned extent");
    const std::size_t first = side == Side::Left ? gl : gl + n - width;
    HaloMessage msg{me, 0, static_cast<std::uint8_t>(side), {}};
    msg.values.assign(field.begin() + static_cast<std::ptrdiff_t>(first * inner),
                      field.begin() + static_cast<std::ptrdiff_t>((first + width) * inner));
    topo.send(*nb, msg);
  }

  for (Side side : {Side::Left, Side::Right}) {
    const auto nb = sub.neighbour(0, side);
    if (!nb || sub.is_external(0, side)) continue;
    // My left ghosts are my left neighbour's right-edge strip.
    const Side their = side == Side::Left ? Side::Right : Side::Left;
    HaloMessage msg = topo.receive(*nb, 0, static_cast<std::uint8_t>(their));
    const std::size_t width = side == Side::Left ? gl : gr;
    if (msg.values.size() != width * inner)
      throw ProtocolError("rank " + std::to_string(*nb) + " sent " +
                          std::to_string(msg.values.size()) + " values, expected " +
                          std::to_string(width * inner));
    const std::size_t first = side == Side::Left ? 0 : gl + n;
    std::copy(msg.values.begin(), msg.values.end(),
              field.begin() + static_cast<std::ptrdiff_t>(first * inner));
  }
}

std::optional<std::vector<double>> gather_global(WorkerTopology& topo, const Subdomain& sub,
                                                 std::span<const double> owned) {
  if (owned.size() != sub.owned_size())
    throw ProtocolError("gather input has " + std::to_string(owned.size()) +
                        " values, subdomain owns " + std::to_string(sub.owned_size()));
  const auto me = static_cast<std::uint32_t>(topo.rank());
  if (topo.rank() != 0) {
    topo.send(0, HaloMessage{me, kGatherTag, 0, {owned.begin(), owned.end()}});
    return std::nullopt;
  }
  std::size_t total = 1;
  for (auto n : sub.global_shape) total *= n;
  // Slabs along dimension 0 are contiguous in rank order.
  std::vector<double> out(owned.begin(), owned.end());
  out.reserve(total);
  for (int r = 1; r < topo.size(); ++r) {
    HaloMessage msg = topo.receive(r, kGatherTag, 0);
    out.insert(out.end(), msg.values.begin(), msg.values.end());
  }
  if (out.size() != total)
    throw ProtocolError("gathered " + std::to_string(out.size()) + " values, grid has " +
                        std::to_string(total));
  return out;
}

void broadcast(WorkerTopology& topo, std::span<double> values) {
  const auto me = static_cast<std::uint32_t>(topo.rank());
  if (topo.rank() == 0) {
    for (int r = 1; r < topo.size(); ++r)
      topo.send(r, HaloMessage{me, kBroadcastTag, 0, {values.begin(), values.end()}});
    return;
  }
  HaloMessage msg = topo.receive(0, kBroadcastTag, 0);
  if (msg.values.size() != values.size()) throw ProtocolError("broadcast size mismatch");
  std::copy(msg.values.begin(), msg.values.end(), values.begin());
}

double allreduce_min(WorkerTopology& topo, double value) {
  const auto me = static_cast<std::uint32_t>(topo.rank());
  double result = value;
  if (topo.rank() == 0) {
    for (int r = 1; r < topo.size(); ++r) {
      HaloMessage msg = topo.receive(r, kReduceTag, 0);
      if (msg.values.size() != 1) throw ProtocolError("reduce size mismatch");
      result = std::min(result, msg.values[0]);
    }
  } else {
    topo.send(0, HaloMessage{me, kReduceTag, 0, {value}});
  }
  broadcast(topo, std::span<double>(&result, 1));
  return result;
}

}  // namespace molforge::comm
