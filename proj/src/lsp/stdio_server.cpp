#include "cryptomate/lsp/stdio_server.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <memory>
#include <mutex>
#include <thread>
#include <variant>

#include "cryptomate/lsp/framing.hpp"

namespace cryptomate::lsp {

namespace {

struct Incoming {
  Json message;
};
struct Malformed {
  std::string reason;
};
struct EndOfInput {
  std::string reason;  // empty on a clean end
};
struct Finished {
  AnalysisJob job;
  JobResult result;
};

using Event = std::variant<Incoming, Malformed, EndOfInput, Finished>;

class EventQueue {
 public:
  void push(Event e) {
    {
      std::lock_guard lock(mu_);
      events_.push_back(std::move(e));
    }
    cv_.notify_one();
  }

  /// Waits until an event arrives or `deadline` passes.
  std::deque<Event> wait(std::optional<std::chrono::steady_clock::time_point> deadline) {
    std::unique_lock lock(mu_);
    auto ready = [&] { return !events_.empty(); };
    if (deadline)
      cv_.wait_until(lock, *deadline, ready);
    else
      cv_.wait(lock, ready);
    std::deque<Event> out;
    out.swap(events_);
    return out;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> events_;
};

class Worker {
 public:
  explicit Worker(EventQueue& done) : done_(done), thread_([this] { loop(); }) {}

  ~Worker() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_one();
    thread_.join();
  }

  void submit(AnalysisJob job) {
    {
      std::lock_guard lock(mu_);
      jobs_.push_back(std::move(job));
    }
    cv_.notify_one();
  }

 private:
  void loop() {
    for (;;) {
      AnalysisJob job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || !jobs_.empty(); });
        if (stop_) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      JobResult result = runJob(job);
      done_.push(Finished{std::move(job), std::move(result)});
    }
  }

  EventQueue& done_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<AnalysisJob> jobs_;
  bool stop_ = false;
  std::thread thread_;
};

}  // namespace

int runStdioServer(std::istream& in, std::ostream& out, SessionOptions options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto now = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
  };
  auto send = [&](const std::vector<Json>& msgs) {
    for (const auto& m : msgs) out << frame(m.dump(-1, ' ', false, Json::error_handler_t::replace));
    out.flush();
  };

  // Only the main thread writes; a tied stream would flush from the reader.
  in.tie(nullptr);
  auto queue = std::make_shared<EventQueue>();
  EventQueue& events = *queue;
  // Detached: a blocking read on the input stream cannot be interrupted.
  std::thread([&in, queue] {
    EventQueue& events = *queue;
    try {
      while (auto payload = deframe(in)) {
        try {
          events.push(Incoming{Json::parse(*payload)});
        } catch (const Json::parse_error& e) {
          events.push(Malformed{e.what()});
        }
      }
      events.push(EndOfInput{});
    } catch (const FramingError& e) {
      events.push(EndOfInput{e.what()});
    }
  }).detach();

  Session session(std::move(options));
  Worker worker(events);
  for (;;) {
    std::optional<Clock::time_point> deadline;
    if (auto d = session.nextDeadline()) deadline = start + std::chrono::milliseconds(*d);
    for (Event& e : events.wait(deadline)) {
      if (auto* m = std::get_if<Incoming>(&e)) {
        send(session.onMessage(m->message, now()));
        if (session.exitRequested()) return session.exitCode();
      } else if (auto* bad = std::get_if<Malformed>(&e)) {
        send({{{"jsonrpc", "2.0"},
               {"id", nullptr},
               {"error", {{"code", error_code::kParseError}, {"message", bad->reason}}}}});
      } else if (auto* end = std::get_if<EndOfInput>(&e)) {
        if (!end->reason.empty()) std::cerr << "cryptomate: connection closed: " << end->reason << "\n";
        return end->reason.empty() ? session.exitCode() : 1;
      } else if (auto* done = std::get_if<Finished>(&e)) {
        send(session.completeJob(done->job, done->result, now()));
      }
    }
    send(session.onTick(now()));
    for (auto& job : session.takeDueJobs(now())) worker.submit(std::move(job));
  }
}

}  // namespace cryptomate::lsp
