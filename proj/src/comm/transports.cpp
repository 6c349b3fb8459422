#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "molforge/comm.hpp"
#include "molforge/error.hpp"

namespace molforge::comm {

// ---------------------------------------------------------------------------
// Self

void SelfTransport::send(int dest, Frame frame) {
  if (dest != 0) throw CommError(dest, "single-rank transport has no such peer");
  queue_.push_back(std::move(frame));
}

Frame SelfTransport::receive(int source) {
  if (source != 0) throw CommError(source, "single-rank transport has no such peer");
  if (head_ == queue_.size()) throw CommError(0, "receive would block forever");
  Frame f = std::move(queue_[head_++]);
  if (head_ == queue_.size()) {
    queue_.clear();
    head_ = 0;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Loopback (threads)

struct LoopbackHub::State {
  explicit State(int n) : size(n), boxes(static_cast<std::size_t>(n * n)) {}

  int size;
  std::mutex mutex;
  std::condition_variable cv;
  std::vector<std::deque<Frame>> boxes;  // index source * size + dest
  int failed = -1;

  std::deque<Frame>& box(int src, int dst) { return boxes[static_cast<std::size_t>(src * size + dst)]; }
};

namespace {

class LoopbackEndpoint final : public Transport {
 public:
  LoopbackEndpoint(LoopbackHub::State* state, int rank) : state_(state), rank_(rank) {}

  int rank() const override { return rank_; }
  int size() const override { return state_->size; }

  void send(int dest, Frame frame) override {
    if (dest < 0 || dest >= state_->size) throw CommError(dest, "no such rank");
    {
      std::lock_guard lock(state_->mutex);
      if (state_->failed >= 0) throw CommError(state_->failed, "worker aborted");
      state_->box(rank_, dest).push_back(std::move(frame));
    }
    state_->cv.notify_all();
  }

  Frame receive(int source) override {
    if (source < 0 || source >= state_->size) throw CommError(source, "no such rank");
    std::unique_lock lock(state_->mutex);
    auto& q = state_->box(source, rank_);
    state_->cv.wait(lock, [&] { return !q.empty() || state_->failed >= 0; });
    if (q.empty()) throw CommError(source, "worker " + std::to_string(state_->failed) + " aborted");
    Frame f = std::move(q.front());
    q.pop_front();
    return f;
  }

 private:
  LoopbackHub::State* state_;
  int rank_;
};

}  // namespace

LoopbackHub::LoopbackHub(int size) : state_(std::make_unique<State>(size)) {
  if (size < 1) throw CommError(0, "worker group needs at least one rank");
  for (int r = 0; r < size; ++r)
    endpoints_.push_back(std::make_unique<LoopbackEndpoint>(state_.get(), r));
}

LoopbackHub::~LoopbackHub() = default;

Transport& LoopbackHub::endpoint(int rank) { return *endpoints_.at(static_cast<std::size_t>(rank)); }

void LoopbackHub::abort(int failed_rank) {
  {
    std::lock_guard lock(state_->mutex);
    if (state_->failed < 0) state_->failed = failed_rank;
  }
  state_->cv.notify_all();
}

// ---------------------------------------------------------------------------
// Socket pairs (processes)

namespace {

class SocketTransport final : public Transport {
 public:
  SocketTransport(int rank, std::vector<int> fds) : rank_(rank), fds_(std::move(fds)) {}
  ~SocketTransport() override {
    for (int fd : fds_)
      if (fd >= 0) ::close(fd);
  }

  int rank() const override { return rank_; }
  int size() const override { return static_cast<int>(fds_.size()); }

  void send(int dest, Frame frame) override {
    if (dest == rank_) {
      self_.push_back(std::move(frame));
      return;
    }
    const int fd = peer_fd(dest);
    std::size_t done = 0;
    while (done < frame.size()) {
      const ssize_t n = ::send(fd, frame.data() + done, frame.size() - done, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw CommError(dest, std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  Frame receive(int source) override {
    if (source == rank_) {
      if (self_.empty()) throw CommError(source, "receive from self would block forever");
      Frame f = std::move(self_.front());
      self_.pop_front();
      return f;
    }
    const int fd = peer_fd(source);
    Frame f(kHeaderBytes);
    read_exact(fd, source, f.data(), kHeaderBytes);
    const std::size_t body = payload_bytes(f);
    f.resize(kHeaderBytes + body);
    read_exact(fd, source, f.data() + kHeaderBytes, body);
    return f;
  }

 private:
  int peer_fd(int peer) const {
    if (peer < 0 || peer >= size() || fds_[static_cast<std::size_t>(peer)] < 0)
      throw CommError(peer, "no channel");
    return fds_[static_cast<std::size_t>(peer)];
  }

  static void read_exact(int fd, int peer, std::byte* dst, std::size_t len) {
    std::size_t done = 0;
    while (done < len) {
      const ssize_t n = ::recv(fd, dst + done, len - done, 0);
      if (n == 0) throw CommError(peer, "connection closed");
      if (n < 0) {
        if (errno == EINTR) continue;
        throw CommError(peer, std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  int rank_;
  std::vector<int> fds_;
  std::deque<Frame> self_;
};

void run_threads(int workers, const std::function<void(Transport&)>& body) {
  LoopbackHub hub(workers);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int r) {
    try {
      body(hub.endpoint(r));
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
      hub.abort(r);
    }
  };
  std::vector<std::thread> threads;
  for (int r = 1; r < workers; ++r) threads.emplace_back(work, r);
  work(0);
  for (auto& t : threads) t.join();
  // Report the originating failure, not the CommErrors it caused elsewhere.
  std::exception_ptr first;
  for (auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const CommError&) {
      if (!first) first = e;
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first) std::rethrow_exception(first);
}

void run_processes(int workers, const std::function<void(Transport&)>& body) {
  // channel[i][j] is rank i's end of the (i, j) socket pair.
  std::vector<std::vector<int>> channel(static_cast<std::size_t>(workers),
                                        std::vector<int>(static_cast<std::size_t>(workers), -1));
  auto close_all = [&] {
    for (auto& row : channel)
      for (int& fd : row)
        if (fd >= 0) {
          ::close(fd);
          fd = -1;
        }
  };
  for (int i = 0; i < workers; ++i)
    for (int j = i + 1; j < workers; ++j) {
      int sv[2];
      if (::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) != 0) {
        close_all();
        throw CommError(j, std::string("socketpair: ") + std::strerror(errno));
      }
      channel[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = sv[0];
      channel[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = sv[1];
    }

  auto keep_only = [&](int rank) {
    std::vector<int> mine = channel[static_cast<std::size_t>(rank)];
    for (auto& x : channel[static_cast<std::size_t>(rank)]) x = -1;
    close_all();
    return mine;
  };

  std::vector<pid_t> children;
  for (int r = 1; r < workers; ++r) {
    const pid_t pid = ::fork();
    if (pid < 0) {
      close_all();
      for (pid_t c : children) ::waitpid(c, nullptr, 0);
      throw CommError(r, std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
      int status = 0;
      try {
        SocketTransport t(r, keep_only(r));
        body(t);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "worker %d: %s\n", r, e.what());
        status = 1;
      } catch (...) {
        status = 1;
      }
      ::_exit(status);
    }
    children.push_back(pid);
  }

  std::exception_ptr error;
  try {
    SocketTransport t(0, keep_only(0));
    body(t);
  } catch (...) {
    error = std::current_exception();
  }

  int failed = -1;
  for (std::size_t i = 0; i < children.size(); ++i) {
    int status = 0;
    while (::waitpid(children[i], &status, 0) < 0 && errno == EINTR) {
    }
    if (!(WIFEXITED(status) && WEXITSTATUS(status) == 0) && failed < 0)
      failed = static_cast<int>(i) + 1;
  }
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const CommError&) {
      if (failed > 0) throw CommError(failed, "worker process failed");
      throw;
    }
  }
  if (failed > 0) throw CommError(failed, "worker process failed");
}

}  // namespace

void run_workers(int workers, TransportKind kind, const std::function<void(Transport&)>& body) {
  if (workers < 1) throw CommError(0, "worker group needs at least one rank");
  if (workers == 1) {
    SelfTransport self;
    body(self);
    return;
  }
  if (kind == TransportKind::Threads)
    run_threads(workers, body);
  else
    run_processes(workers, body);
}

}  // namespace molforge::comm
