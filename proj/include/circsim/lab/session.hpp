#pragma once

// Live editing sessions: each holds one sketch revision, applies mutations
// in a total order and re-simulates in the background.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "circsim/sketch.hpp"
#include "circsim/sketch_io.hpp"

namespace circsim::lab {

inline constexpr std::chrono::milliseconds kCoalescingWindow{30};

struct LoadSketch {
    Sketch sketch;
};
struct SetProperty {
    std::string component;
    std::string name;
    PropertyValue value;
};
struct ToggleSwitch {
    std::string component;
};
struct SetPotPosition {
    std::string component;
    double position = 0.5;
};
struct SetMeterMode {
    std::string component;
    std::string mode;
};
/// An absent location unplugs the probe.
struct MoveProbe {
    std::string component;
    std::string jack;
    std::optional<Location> location;
};
struct AddWire {
    Wire wire;
};
struct RemoveWire {
    std::string wire;
};

using Mutation = std::variant<LoadSketch, SetProperty, ToggleSwitch, SetPotPosition, SetMeterMode, MoveProbe, AddWire, RemoveWire>;

struct MutationResult {
    std::optional<Sketch> sketch;
    std::vector<Diagnostic> diagnostics;
};

/// The edited copy of `sketch`, or the reasons it was refused. The result
/// must pass validate_sketch to be accepted.
[[nodiscard]] MutationResult apply_to(const Sketch& sketch, const Mutation& m);

struct ResultsFrame {
    std::uint64_t revision = 0;
    ReportDocument report;

    bool operator==(const ResultsFrame&) const = default;
};

/// Blocking FIFO of frames for one subscriber.
class FrameQueue {
public:
    void push(ResultsFrame frame);
    /// Next frame, or nullopt on timeout or once closed and drained.
    [[nodiscard]] std::optional<ResultsFrame> pop(std::chrono::milliseconds timeout);
    void close();

private:
    std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<ResultsFrame> frames_;
    bool closed_ = false;
};

struct MutationOutcome {
    bool accepted = false;
    std::uint64_t revision = 0;  // current revision after the call
    std::vector<Diagnostic> diagnostics;
};

class Session {
public:
    using Subscriber = std::function<void(const ResultsFrame&)>;

    Session(std::string id, std::chrono::milliseconds window, SolveOptions opts);
    ~Session();
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] std::uint64_t revision() const;
    [[nodiscard]] std::shared_ptr<const Sketch> sketch() const;

    MutationOutcome apply(const Mutation& m);

    /// Last published frame; revision 0 with an empty report before any edit.
    [[nodiscard]] ResultsFrame snapshot() const;

    /// `fn` is first called with the current snapshot, then with every later
    /// frame, always in increasing revision order and never concurrently.
    std::uint64_t subscribe(Subscriber fn);
    void unsubscribe(std::uint64_t token);
    [[nodiscard]] std::shared_ptr<FrameQueue> subscribe_queue();

    /// Throws Error(UnknownTerminal).
    [[nodiscard]] std::set<Terminal> highlight(const Terminal& t) const;

    /// Blocks until a frame at `revision` or later is published.
    bool wait_published(std::uint64_t revision, std::chrono::milliseconds timeout) const;

    /// Number of simulations run so far.
    [[nodiscard]] std::uint64_t simulations() const;

private:
    void worker_loop(std::stop_token stop);
    void publish(ResultsFrame frame);

    std::string id_;
    std::chrono::milliseconds window_;
    SolveOptions opts_;

    mutable std::mutex state_mutex_;
    mutable std::condition_variable_any state_cv_;
    std::shared_ptr<const Sketch> sketch_;
    std::uint64_t revision_ = 0;
    std::uint64_t simulations_ = 0;

    mutable std::mutex publish_mutex_;
    mutable std::condition_variable published_cv_;
    ResultsFrame last_frame_;
    std::map<std::uint64_t, Subscriber> subscribers_;
    std::uint64_t next_token_ = 1;

    std::jthread worker_;
};

class SessionManager {
public:
    explicit SessionManager(std::chrono::milliseconds window = kCoalescingWindow, SolveOptions opts = {});

    std::string create_session();
    /// Throws Error(UnknownSession).
    [[nodiscard]] std::shared_ptr<Session> find(const std::string& id) const;

    MutationOutcome apply_mutation(const std::string& id, const Mutation& m) { return find(id)->apply(m); }
    [[nodiscard]] std::set<Terminal> highlight(const std::string& id, const Terminal& t) const { return find(id)->highlight(t); }
    [[nodiscard]] ResultsFrame snapshot(const std::string& id) const { return find(id)->snapshot(); }

private:
    std::chrono::milliseconds window_;
    SolveOptions opts_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace circsim::lab
