// Copyright 2026 The ftnoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "ftnoc/simkernel.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include "ftnoc/error.hpp"

namespace ftnoc {

std::vector<FaultEvent> inject(const Injection& injection, std::int64_t detection_latency,
                               const ArchitectureGraph& ag) {
  (void)implicated_faults(injection.location, ag);  // target check
  std::vector<FaultEvent> out;
  auto event = [&](std::int64_t occurred, bool retest) {
    FaultEvent e;
    e.time = occurred + detection_latency;
    e.location = injection.location;
    e.stuck = injection.stuck;
    e.detection_latency = detection_latency;
    e.retest_fail = retest;
    out.push_back(e);
  };
  switch (injection.persistence) {
    case Persistence::Transient: event(injection.time, false); break;
    case Persistence::Intermittent:
      for (int i = 0; i < injection.count; ++i) event(injection.time + i * injection.spacing, false);
      break;
    case Persistence::Permanent: event(injection.time, true); break;
  }
  return out;
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::None: return "none";
    case DropReason::Unreachable: return "unreachable";
    case DropReason::BrokenRoute: return "broken_route";
    case DropReason::InFlight: return "in_flight";
  }
  return "?";
}

std::string Metrics::summary() const {
  std::ostringstream os;
  std::int64_t busy = 0;
  for (auto b : link_busy) busy += b;
  os << "makespan=" << makespan << '\n'
     << "completed=" << (completed ? "true" : "false") << '\n'
     << "tasks_finished=" << tasks_finished << '\n'
     << "flows_injected=" << flows_injected << '\n'
     << "flows_delivered=" << flows_delivered << '\n'
     << "dropped=" << dropped << '\n'
     << "link_busy_total=" << busy << '\n'
     << "remaps=" << remaps << '\n'
     << "mpm_hits=" << mpm_hits << '\n'
     << "mpm_misses=" << mpm_misses << '\n'
     << "mpm_stores=" << mpm_stores << '\n'
     << "table_rebuilds=" << table_rebuilds << '\n';
  for (std::size_t i = 0; i < latency.size(); ++i) os << "latency." << i << '=' << latency[i].to_string() << '\n';
  for (std::size_t i = 0; i < recoveries.size(); ++i)
    os << "recovery." << i << "=report:" << recoveries[i].report_time << " deploy:" << recoveries[i].deploy_time
       << " wall:" << recoveries[i].deploy_time - recoveries[i].report_time << '\n';
  return os.str();
}

std::string Metrics::link_table(const ArchitectureGraph& ag) const {
  std::ostringstream os;
  os << "link,src,dst,busy\n";
  for (const Link& l : ag.links())
    os << l.id << ',' << l.src << ',' << l.dst << ',' << link_busy[static_cast<std::size_t>(l.id)] << '\n';
  return os.str();
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + '\n';
  return s;
}

namespace {

enum class Kind : std::uint8_t { FaultOccur, CheckerReport, Aging, Deploy, FlowInject, FlowDeliver, TaskFinish, TaskStart };

int priority(Kind k) {
  switch (k) {
    case Kind::FaultOccur: return 0;
    case Kind::CheckerReport:
    case Kind::Aging: return 1;
    case Kind::Deploy: return 2;
    case Kind::FlowInject: return 3;
    case Kind::FlowDeliver: return 4;
    case Kind::TaskFinish: return 5;
    case Kind::TaskStart: return 6;
  }
  return 7;
}

struct Event {
  std::int64_t time = 0;
  int prio = 0;
  std::uint64_t seq = 0;
  Kind kind = Kind::TaskStart;
  int epoch = 0;
  int index = 0;  // task, flow, trace, report, aging or deploy index depending on kind

  bool operator>(const Event& o) const {
    return std::tie(time, prio, seq) > std::tie(o.time, o.prio, o.seq);
  }
};

std::size_t at(int i) { return static_cast<std::size_t>(i); }

class Kernel {
 public:
  explicit Kernel(const Scenario& s)
      : scenario_(s), inst_(s), msu_(inst_.tg, inst_.ag, inst_.msu),
        shmu_(inst_.ag, inst_.shm, msu_, inst_.shmu), phys_(inst_.shm),
        phys_rg_(msu_.network(phys_).rg) {
    const auto m = inst_.tg.size();
    done_.assign(m, false);
    running_.assign(m, false);
    executed_.assign(m, std::nullopt);
    link_busy_.assign(inst_.ag.link_count(), 0);
  }

  SimResult run() {
    const DeployResult first = shmu_.initial_deploy();
    result_.initial_mapping = first.mapping;
    result_.initial_schedule = first.schedule;
    install(first.mapping, first.schedule, 0);

    for (std::size_t i = 0; i < scenario_.injections.size(); ++i) {
      const Injection& inj = scenario_.injections[i];
      if (inj.persistence == Persistence::Permanent) push(inj.time, Kind::FaultOccur, static_cast<int>(i));
      for (const FaultEvent& e : inject(inj, scenario_.detection_latency, inst_.ag)) {
        reports_.push_back(e);
        push(e.time, Kind::CheckerReport, static_cast<int>(reports_.size() - 1));
      }
    }
    for (std::size_t i = 0; i < scenario_.aging.size(); ++i)
      push(scenario_.aging[i].time, Kind::Aging, static_cast<int>(i));

    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      dispatch(e);
    }
    return finish();
  }

 private:
  void push(std::int64_t time, Kind k, int index) {
    queue_.push(Event{time, priority(k), seq_++, k, epoch_, index});
  }

  void log(std::int64_t t, std::string_view kind, const std::string& payload) {
    result_.trace.push_back(std::to_string(t) + ' ' + std::string(kind) + ' ' + payload);
  }

  // Puts a plan on the timeline under a fresh epoch.
  void install(const Mapping& mapping, const Schedule& plan, std::int64_t now) {
    ++epoch_;
    mapping_ = mapping;
    plan_ = plan;
    for (std::size_t t = 0; t < plan.tasks.size(); ++t)
      if (!done_[t]) push(plan.tasks[t].start, Kind::TaskStart, static_cast<int>(t));
    for (const FlowRecord& f : plan.flows)
      if (!f.retained && !f.local()) push(f.inject, Kind::FlowInject, f.flow);
    log(now, "deploy", "epoch=" + std::to_string(epoch_) + " mapping=" + to_string(mapping));
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case Kind::FaultOccur: return on_fault(e);
      case Kind::CheckerReport: return on_report(e);
      case Kind::Aging: return on_aging(e);
      case Kind::Deploy: return on_deploy(e);
      case Kind::FlowInject:
        if (e.epoch == epoch_) on_inject(e);
        return;
      case Kind::FlowDeliver: return on_deliver(e);
      case Kind::TaskFinish:
        if (e.epoch == epoch_) on_finish(e);
        return;
      case Kind::TaskStart:
        if (e.epoch == epoch_) on_start(e);
        return;
    }
  }

  bool sender_ready(int task) const { return done_[at(task)]; }

  // Flow injection sorts before task completion at equal times, so a sender
  // finishing right now counts as done.
  bool sender_ready_at(int task, std::int64_t now) const {
    return done_[at(task)] || (running_[at(task)] && plan_.tasks[at(task)].finish <= now);
  }

  bool inputs_ready(int task) const {
    for (int edge : inst_.tg.in_edges(task)) {
      const FlowRecord& f = plan_.flows[at(edge)];
      if (f.retained) continue;
      if (f.local()) {
        if (!sender_ready(f.src_task)) return false;
      } else if (delivered_epoch_.count(edge) == 0 || delivered_epoch_.at(edge) != epoch_) {
        return false;
      }
    }
    return true;
  }

  void on_start(const Event& e) {
    const int t = e.index;
    const TaskSlot& slot = plan_.tasks[at(t)];
    if (!phys_.pe_usable(slot.tile)) {
      log(e.time, "task_blocked", "task=" + std::to_string(t) + " tile=" + std::to_string(slot.tile) + " reason=pe");
      return;
    }
    if (!inputs_ready(t)) {
      log(e.time, "task_blocked", "task=" + std::to_string(t) + " tile=" + std::to_string(slot.tile) + " reason=input");
      return;
    }
    running_[at(t)] = true;
    log(e.time, "task_start", "task=" + std::to_string(t) + " tile=" + std::to_string(slot.tile));
    push(slot.finish, Kind::TaskFinish, t);
  }

  void on_finish(const Event& e) {
    const int t = e.index;
    if (!running_[at(t)]) return;
    running_[at(t)] = false;
    done_[at(t)] = true;
    executed_[at(t)] = plan_.tasks[at(t)];
    log(e.time, "task_finish", "task=" + std::to_string(t) + " tile=" + std::to_string(plan_.tasks[at(t)].tile));
  }

  void on_inject(const Event& e) {
    const FlowRecord& f = plan_.flows[at(e.index)];
    if (!sender_ready_at(f.src_task, e.time)) {
      log(e.time, "flow_blocked", "flow=" + std::to_string(f.flow));
      return;
    }
    FlowTrace ft;
    ft.flow = f.flow;
    ft.epoch = epoch_;
    ft.src_tile = f.src_tile;
    ft.dst_tile = f.dst_tile;
    ft.route = f.route.nodes;
    ft.links = f.route.links;
    ft.inject = e.time;
    ++flows_injected_;
    if (should_drop(shmu_.tables(), f.src_tile, f.dst_tile)) {
      ft.dropped = true;
      ft.reason = DropReason::Unreachable;
    } else if (!is_path_in(*phys_rg_, f.route.nodes)) {
      ft.dropped = true;
      ft.reason = DropReason::BrokenRoute;
    }
    if (ft.dropped) {
      log(e.time, "flow_drop", "flow=" + std::to_string(f.flow) + " reason=" + std::string(to_string(ft.reason)));
      result_.flows.push_back(std::move(ft));
      return;
    }
    const std::int64_t len = f.weight * scenario_.comm.link_cycles;
    for (std::size_t i = 0; i < ft.links.size(); ++i) ft.occupancy.push_back(LinkInterval{f.flow, e.time, e.time + len});
    log(e.time, "flow_inject", "flow=" + std::to_string(f.flow) + " src=" + std::to_string(f.src_tile) +
                                   " dst=" + std::to_string(f.dst_tile) + " hops=" + std::to_string(ft.links.size()));
    result_.flows.push_back(std::move(ft));
    in_flight_.push_back(result_.flows.size() - 1);
    push(e.time + (f.arrival - f.inject), Kind::FlowDeliver, static_cast<int>(result_.flows.size() - 1));
  }

  void on_deliver(const Event& e) {
    FlowTrace& ft = result_.flows[at(e.index)];
    std::erase(in_flight_, at(e.index));
    if (ft.dropped) return;
    ft.delivery = e.time;
    ++flows_delivered_;
    if (ft.epoch == epoch_) delivered_epoch_[ft.flow] = epoch_;
    log(e.time, "flow_deliver", "flow=" + std::to_string(ft.flow) + " epoch=" + std::to_string(ft.epoch));
  }

  void on_fault(const Event& e) {
    const Injection& inj = scenario_.injections[at(e.index)];
    for (const Fault& f : implicated_faults(inj.location, inst_.ag)) apply_fault(phys_, f);
    phys_rg_ = msu_.network(phys_).rg;
    log(e.time, "fault", describe(inj.location));
    kill_on_unusable(e.time);
    if (!scenario_.drop_in_flight) return;
    for (std::size_t idx : std::vector<std::size_t>(in_flight_)) {
      FlowTrace& ft = result_.flows[idx];
      if (is_path_in(*phys_rg_, ft.route)) continue;
      ft.dropped = true;
      ft.reason = DropReason::InFlight;
      ft.occupancy.clear();
      std::erase(in_flight_, idx);
      log(e.time, "flow_drop", "flow=" + std::to_string(ft.flow) + " reason=in_flight");
    }
  }

  void handle_action(const ShmuAction& a, std::int64_t now) {
    result_.metrics.mpm_stores += a.stored.size();
    if (!a.deploy) return;
    ++result_.metrics.remaps;
    if (a.deploy->latency.hit)
      ++result_.metrics.mpm_hits;
    else
      ++result_.metrics.mpm_misses;
    result_.metrics.latency.push_back(a.deploy->latency);
    const std::int64_t when = now + a.deploy->latency.t_rl;
    result_.metrics.recoveries.push_back(RecoveryRecord{now, when});
    deploys_.push_back(*a.deploy);
    push(when, Kind::Deploy, static_cast<int>(deploys_.size() - 1));
  }

  void on_report(const Event& e) {
    const FaultEvent& ev = reports_[at(e.index)];
    log(e.time, "report", describe(ev.location) + (ev.retest_fail ? " retest=fail" : ""));
    handle_action(shmu_.on_event(ev), e.time);
  }

  void kill_on_unusable(std::int64_t now) {
    for (std::size_t t = 0; t < running_.size(); ++t)
      if (running_[t] && !phys_.pe_usable(plan_.tasks[t].tile)) {
        running_[t] = false;
        log(now, "task_killed", "task=" + std::to_string(t));
      }
  }

  // Partial aging slows only work planned after the next deploy; a fully
  // aged PE stops at once.
  void on_aging(const Event& e) {
    const AgingUpdate& u = scenario_.aging[at(e.index)];
    set_aging(phys_, u.tile, u.percent);
    log(e.time, "aging", "tile=" + std::to_string(u.tile) + " percent=" + std::to_string(u.percent));
    kill_on_unusable(e.time);
    handle_action(shmu_.on_aging(e.time, u.tile, u.percent), e.time);
  }

  // Finished work is kept when its PE is still healthy or every consumer of it is kept.
  std::vector<std::optional<TaskSlot>> retained_slots() const {
    const TaskGraph& tg = inst_.tg;
    std::vector<std::optional<TaskSlot>> fixed(tg.size());
    const auto& order = tg.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int t = *it;
      if (!done_[at(t)] || !executed_[at(t)]) continue;
      bool keep = shmu_.shm().pe_usable(executed_[at(t)]->tile);
      if (!keep) {
        keep = true;
        for (int edge : tg.out_edges(t))
          if (!fixed[at(tg.edges()[at(edge)].dst)]) keep = false;
      }
      if (keep) fixed[at(t)] = executed_[at(t)];
    }
    return fixed;
  }

  void on_deploy(const Event& e) {
    const DeployResult& d = deploys_[at(e.index)];
    for (std::size_t t = 0; t < running_.size(); ++t)
      if (running_[t]) {
        running_[t] = false;
        log(e.time, "task_aborted", "task=" + std::to_string(t));
      }
    const Network net = shmu_.network();
    const MappingProblem p = msu_.problem(shmu_.shm(), net);

    ScheduleContext ctx;
    ctx.not_before = e.time;
    ctx.fixed = retained_slots();
    // Retained tasks stay where they ran, whatever the new mapping says.
    Mapping effective;
    std::optional<Schedule> plan;
    for (int attempt = 0; attempt < 3 && !plan; ++attempt) {
      if (attempt == 1)  // keep only work already sitting where the new mapping wants it
        for (std::size_t t = 0; t < ctx.fixed.size(); ++t)
          if (ctx.fixed[t] && ctx.fixed[t]->tile != d.mapping[t]) ctx.fixed[t].reset();
      if (attempt == 2) std::fill(ctx.fixed.begin(), ctx.fixed.end(), std::nullopt);
      effective = d.mapping;
      for (std::size_t t = 0; t < ctx.fixed.size(); ++t)
        if (ctx.fixed[t]) effective.assignment[t] = ctx.fixed[t]->tile;
      try {
        plan = asap_schedule(p, effective, &ctx);
      } catch (const UnroutableFlow&) {
      } catch (const InvalidMapping&) {
      }
    }
    if (!plan) {
      log(e.time, "deploy_failed", "mapping=" + to_string(d.mapping));
      return;
    }
    for (std::size_t t = 0; t < ctx.fixed.size(); ++t) {
      done_[t] = ctx.fixed[t].has_value();
      if (!done_[t]) executed_[t].reset();
    }
    msu_.set_current(CurrentMappingMemory{effective, *plan, fault_tag(shmu_.shm())});
    install(effective, *plan, e.time);
  }

  SimResult finish() {
    Metrics& m = result_.metrics;
    m.completed = std::all_of(done_.begin(), done_.end(), [](bool b) { return b; });
    m.tasks_finished = static_cast<std::size_t>(std::count(done_.begin(), done_.end(), true));
    for (const auto& slot : executed_)
      if (slot) m.makespan = std::max(m.makespan, slot->finish);
    for (const FlowTrace& ft : result_.flows)
      for (std::size_t i = 0; i < ft.occupancy.size(); ++i)
        link_busy_[at(ft.links[i])] += ft.occupancy[i].end - ft.occupancy[i].start;
    m.link_busy = link_busy_;
    m.flows_injected = flows_injected_;
    m.flows_delivered = flows_delivered_;
    m.dropped = static_cast<std::size_t>(
        std::count_if(result_.flows.begin(), result_.flows.end(), [](const FlowTrace& f) { return f.dropped; }));
    m.table_rebuilds = shmu_.table_rebuilds();
    result_.decisions = shmu_.decision_log();
    result_.mpm_dump = msu_.mpm().dump();
    result_.final_mapping = mapping_;
    result_.final_schedule = plan_;
    result_.final_shm = shmu_.shm();
    result_.executed = executed_;
    return std::move(result_);
  }

  const Scenario& scenario_;
  ScenarioInstance inst_;
  Msu msu_;
  Shmu shmu_;
  SystemHealthMap phys_;  // ground truth, ahead of the SHMU's view by the detection latency
  std::shared_ptr<const RoutingGraph> phys_rg_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  int epoch_ = 0;
  Mapping mapping_;
  Schedule plan_;
  std::vector<bool> done_;
  std::vector<bool> running_;
  std::vector<std::optional<TaskSlot>> executed_;
  std::map<int, int> delivered_epoch_;
  std::vector<std::size_t> in_flight_;
  std::vector<FaultEvent> reports_;
  std::vector<DeployResult> deploys_;
  std::vector<std::int64_t> link_busy_;
  std::size_t flows_injected_ = 0;
  std::size_t flows_delivered_ = 0;
  SimResult result_{{}, {}, {}, {}, {}, {}, {}, {}, {}, SystemHealthMap(inst_.ag), {}};
};

}  // namespace

SimResult run(const Scenario& scenario) {
  if (auto err = validate_scenario(scenario)) throw SemanticError(*err);
  Kernel k(scenario);
  return k.run();
}

}  // namespace ftnoc
