#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "molforge/grid.hpp"

namespace molforge::comm {

using Frame = std::vector<std::byte>;

/// Ordered, reliable byte-frame channel between ranks. Frames between a fixed
/// (source, destination) pair arrive in send order.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual int rank() const = 0;
  virtual int size() const = 0;
  virtual void send(int dest, Frame frame) = 0;
  /// Blocks until the next frame from `source` is available.
  virtual Frame receive(int source) = 0;
};

/// Halo message as it travels on the wire:
///   u32 source rank | u8 dimension | u8 side | u32 count | count x f64
/// All little-endian.
struct HaloMessage {
  std::uint32_t source = 0;
  std::uint8_t dimension = 0;
  std::uint8_t side = 0;
  std::vector<double> values;
};

inline constexpr std::size_t kHeaderBytes = 10;
/// Dimension tags reserved for collective traffic.
inline constexpr std::uint8_t kGatherTag = 0xFF;
inline constexpr std::uint8_t kBroadcastTag = 0xFE;
inline constexpr std::uint8_t kReduceTag = 0xFD;

Frame encode(const HaloMessage& msg);
HaloMessage decode(std::span<const std::byte> frame);
/// Payload byte length announced by a frame header.
std::size_t payload_bytes(std::span<const std::byte> header);

/// A rank's view of the worker group plus tag-matched receive.
class WorkerTopology {
 public:
  explicit WorkerTopology(Transport& transport) : transport_(&transport) {}

  int rank() const { return transport_->rank(); }
  int size() const { return transport_->size(); }
  Transport& transport() { return *transport_; }

  void send(int dest, const HaloMessage& msg);
  /// Next message from `source` carrying (dimension, side); other messages
  /// from that source are held back for later matches.
  HaloMessage receive(int source, std::uint8_t dimension, std::uint8_t side);

 private:
  Transport* transport_;
  std::map<std::tuple<int, std::uint8_t, std::uint8_t>, std::vector<HaloMessage>> pending_;
};

/// Padded extent along dimension 0 (ghosts + owned) times the other extents.
std::size_t padded_size(const Subdomain& sub);

/// Fill the internal-edge ghost strips of `field` (laid out row-major with
/// dimension 0 slowest, ghosts included along dimension 0) from the
/// neighbours' adjacent owned strips. Owned values and external ghosts are
/// left untouched.
void exchange_halos(WorkerTopology& topo, const Subdomain& sub, std::span<double> field);

/// Collect owned values of every rank, in global order, on rank 0.
std::optional<std::vector<double>> gather_global(WorkerTopology& topo, const Subdomain& sub,
                                                 std::span<const double> owned);

/// Rank 0's values overwrite everyone's.
void broadcast(WorkerTopology& topo, std::span<double> values);

double allreduce_min(WorkerTopology& topo, double value);

// ---------------------------------------------------------------------------
// Transports

/// In-process mailboxes shared by a set of ranks (threads).
class LoopbackHub {
 public:
  explicit LoopbackHub(int size);
  ~LoopbackHub();
  LoopbackHub(const LoopbackHub&) = delete;
  LoopbackHub& operator=(const LoopbackHub&) = delete;

  Transport& endpoint(int rank);
  /// Wake every blocked receiver with a CommError; used when a worker dies.
  void abort(int failed_rank);

  struct State;

 private:
  std::unique_ptr<State> state_;
  std::vector<std::unique_ptr<Transport>> endpoints_;
};

/// Single-rank transport; sends go to self.
class SelfTransport final : public Transport {
 public:
  int rank() const override { return 0; }
  int size() const override { return 1; }
  void send(int dest, Frame frame) override;
  Frame receive(int source) override;

 private:
  std::vector<Frame> queue_;
  std::size_t head_ = 0;
};

enum class TransportKind { Threads, Processes };

/// Run `body` on `workers` ranks and wait for all of them. Threads share the
/// process; Processes forks workers-1 children connected by socket pairs and
/// runs rank 0 in the caller. A failure on any rank is rethrown in the caller.
void run_workers(int workers, TransportKind kind, const std::function<void(Transport&)>& body);

}  // namespace molforge::comm
