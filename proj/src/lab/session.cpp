#include "circsim/lab/session.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "circsim/devices.hpp"
#include "circsim/error.hpp"
#include "circsim/nets.hpp"

namespace circsim::lab {

namespace {

MutationResult refuse(DiagnosticCode code, std::string subject, std::string detail) {
    MutationResult r;
    r.diagnostics.push_back({code, std::move(subject), std::move(detail), 0, 0});
    return r;
}

class Editor {
public:
    explicit Editor(Sketch sketch) : next_(std::move(sketch)) {}

    MutationResult operator()(const LoadSketch& m) {
        next_ = m.sketch;
        return finish();
    }

    MutationResult operator()(const SetProperty& m) {
        auto* c = next_.find_component(m.component);
        if (c == nullptr) return missing(m.component);
        c->properties[m.name] = m.value;
        return finish();
    }

    MutationResult operator()(const ToggleSwitch& m) {
        auto* c = next_.find_component(m.component);
        if (c == nullptr) return missing(m.component);
        if (c->kind == "switch_spst") {
            c->properties["state"] = std::string(c->text("state", "open") == "closed" ? "open" : "closed");
        } else if (c->kind == "switch_spdt") {
            c->properties["state"] = std::string(c->text("state", "T1") == "T1" ? "T2" : "T1");
        } else {
            return refuse(DiagnosticCode::BadProperty, m.component, "state");
        }
        return finish();
    }

    MutationResult operator()(const SetPotPosition& m) {
        auto* c = next_.find_component(m.component);
        if (c == nullptr) return missing(m.component);
        if (c->kind != "potentiometer") return refuse(DiagnosticCode::BadProperty, m.component, "position");
        c->properties["position"] = m.position;
        return finish();
    }

    MutationResult operator()(const SetMeterMode& m) {
        auto* c = next_.find_component(m.component);
        if (c == nullptr) return missing(m.component);
        if (c->kind != "multimeter") return refuse(DiagnosticCode::BadProperty, m.component, "mode");
        c->properties["mode"] = m.mode;
        return finish();
    }

    MutationResult operator()(const MoveProbe& m) {
        auto* c = next_.find_component(m.component);
        if (c == nullptr) return missing(m.component);
        if (c->kind != "multimeter" || !registry_lookup(c->kind).has_pin(m.jack)) {
            return refuse(DiagnosticCode::BadPin, m.component, m.jack);
        }
        if (m.location) {
            c->placements[m.jack] = *m.location;
        } else {
            c->placements.erase(m.jack);
        }
        return finish();
    }

    MutationResult operator()(const AddWire& m) {
        next_.wires.push_back(m.wire);
        return finish();
    }

    MutationResult operator()(const RemoveWire& m) {
        auto it = std::find_if(next_.wires.begin(), next_.wires.end(), [&](const Wire& w) { return w.id == m.wire; });
        if (it == next_.wires.end()) return refuse(DiagnosticCode::DanglingRef, m.wire, "wire");
        next_.wires.erase(it);
        return finish();
    }

private:
    static MutationResult missing(const std::string& id) { return refuse(DiagnosticCode::DanglingRef, id, "component"); }

    MutationResult finish() {
        MutationResult r;
        r.diagnostics = validate_sketch(next_);
        if (r.diagnostics.empty()) r.sketch = std::move(next_);
        return r;
    }

    Sketch next_;
};

}  // namespace

MutationResult apply_to(const Sketch& sketch, const Mutation& m) { return std::visit(Editor(sketch), m); }

// ---------------------------------------------------------------------------

void FrameQueue::push(ResultsFrame frame) {
    {
        std::lock_guard lk(mutex_);
        if (closed_) return;
        frames_.push_back(std::move(frame));
    }
    ready_.notify_one();
}

std::optional<ResultsFrame> FrameQueue::pop(std::chrono::milliseconds timeout) {
    std::unique_lock lk(mutex_);
    if (!ready_.wait_for(lk, timeout, [&] { return !frames_.empty() || closed_; })) return std::nullopt;
    if (frames_.empty()) return std::nullopt;
    auto f = std::move(frames_.front());
    frames_.pop_front();
    return f;
}

void FrameQueue::close() {
    {
        std::lock_guard lk(mutex_);
        closed_ = true;
    }
    ready_.notify_all();
}

// ---------------------------------------------------------------------------

Session::Session(std::string id, std::chrono::milliseconds window, SolveOptions opts)
    : id_(std::move(id)), window_(window), opts_(opts), sketch_(std::make_shared<const Sketch>()) {
    worker_ = std::jthread([this](std::stop_token st) { worker_loop(st); });
}

Session::~Session() {
    worker_.request_stop();
    state_cv_.notify_all();
}

std::uint64_t Session::revision() const {
    std::lock_guard lk(state_mutex_);
    return revision_;
}

std::shared_ptr<const Sketch> Session::sketch() const {
    std::lock_guard lk(state_mutex_);
    return sketch_;
}

MutationOutcome Session::apply(const Mutation& m) {
    std::unique_lock lk(state_mutex_);
    auto result = apply_to(*sketch_, m);
    MutationOutcome out;
    if (!result.sketch) {
        out.revision = revision_;
        out.diagnostics = std::move(result.diagnostics);
        return out;
    }
    sketch_ = std::make_shared<const Sketch>(std::move(*result.sketch));
    out.accepted = true;
    out.revision = ++revision_;
    lk.unlock();
    state_cv_.notify_all();
    return out;
}

ResultsFrame Session::snapshot() const {
    std::lock_guard lk(publish_mutex_);
    return last_frame_;
}

std::uint64_t Session::subscribe(Subscriber fn) {
    std::lock_guard lk(publish_mutex_);
    fn(last_frame_);
    const auto token = next_token_++;
    subscribers_.emplace(token, std::move(fn));
    return token;
}

void Session::unsubscribe(std::uint64_t token) {
    std::lock_guard lk(publish_mutex_);
    subscribers_.erase(token);
}

std::shared_ptr<FrameQueue> Session::subscribe_queue() {
    auto q = std::make_shared<FrameQueue>();
    subscribe([q](const ResultsFrame& f) { q->push(f); });
    return q;
}

std::set<Terminal> Session::highlight(const Terminal& t) const {
    const auto current = sketch();
    return net_of_terminal(extract_nets(*current), t);
}

bool Session::wait_published(std::uint64_t revision, std::chrono::milliseconds timeout) const {
    std::unique_lock lk(publish_mutex_);
    return published_cv_.wait_for(lk, timeout, [&] { return last_frame_.revision >= revision; });
}

std::uint64_t Session::simulations() const {
    std::lock_guard lk(state_mutex_);
    return simulations_;
}

void Session::publish(ResultsFrame frame) {
    {
        std::lock_guard lk(publish_mutex_);
        last_frame_ = std::move(frame);
        for (const auto& [_, fn] : subscribers_) fn(last_frame_);
    }
    published_cv_.notify_all();
}

void Session::worker_loop(std::stop_token stop) {
    std::uint64_t done = 0;
    for (;;) {
        std::shared_ptr<const Sketch> sketch;
        std::uint64_t revision = 0;
        {
            std::unique_lock lk(state_mutex_);
            if (!state_cv_.wait(lk, stop, [&] { return revision_ > done; })) return;
            // Let a burst of edits settle, then take the newest revision.
            state_cv_.wait_for(lk, stop, window_, [] { return false; });
            if (stop.stop_requested()) return;
            sketch = sketch_;
            revision = revision_;
            ++simulations_;
        }
        auto result = simulate(*sketch, opts_);
        publish({revision, std::move(result.report)});
        done = revision;
    }
}

// ---------------------------------------------------------------------------

SessionManager::SessionManager(std::chrono::milliseconds window, SolveOptions opts) : window_(window), opts_(opts) {}

std::string SessionManager::create_session() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lk(mutex_);
    std::string id;
    do {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
        id = buf;
    } while (sessions_.contains(id));
    sessions_.emplace(id, std::make_shared<Session>(id, window_, opts_));
    return id;
}

std::shared_ptr<Session> SessionManager::find(const std::string& id) const {
    std::lock_guard lk(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session " + id);
    return it->second;
}

}  // namespace circsim::lab
