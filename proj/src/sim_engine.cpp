#include "gridrouter/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace gridrouter {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

std::optional<std::size_t> find_dc(const std::vector<DcFeederConfig>& v, const std::string& id) {
    for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k].feeder.id == id) return k;
    return std::nullopt;
}

std::optional<std::size_t> find_ac(const std::vector<AcFeederConfig>& v, const std::string& id) {
    for (std::size_t k = 0; k < v.size(); ++k)
        if (v[k].feeder.id == id) return k;
    return std::nullopt;
}

const std::string& event_target(const EventKind& k) {
    return std::visit(overloaded{
                          [](const event::LoadStep& e) -> const std::string& { return e.load; },
                          [](const auto& e) -> const std::string& { return e.feeder; },
                      },
                      k);
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

const char* to_string(ControlMode m) {
    switch (m) {
        case ControlMode::series_module: return "series_module";
        case ControlMode::droop: return "droop";
        case ControlMode::none: return "none";
    }
    return "unknown";
}

const char* to_string(RefMode m) { return m == RefMode::setpoint ? "setpoint" : "share"; }

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::completed: return "completed";
        case Verdict::collapsed: return "collapsed";
        case Verdict::diverged: return "diverged";
    }
    return "unknown";
}

void validate(const Scenario& s) {
    if (!(s.duration > 0.0)) fail("duration must be positive");
    if (!(s.dt > 0.0)) fail("dt must be positive");
    if (s.dt > s.duration) fail("dt must not exceed duration");
    if (!(s.sample_period >= s.dt)) fail("sample period must be at least dt");
    if (!(s.grid_hz > 0.0)) fail("grid frequency must be positive");
    validate(s.hub.params);
    if (!(s.hub.collapse_fraction >= 0.0 && s.hub.collapse_fraction < 1.0)) {
        fail("collapse fraction must lie in [0, 1)");
    }
    if (!(s.hub.cpl_floor > 0.0)) fail("cpl floor must be positive");
    if (!(s.hub.vic_loop_z > 0.0)) fail("virtual-inertia loop impedance must be positive");
    if (!(s.hub.dab_bandwidth_hz > 0.0)) fail("DAB bandwidth must be positive");
    if (!(s.controller.ripple_cutoff_hz > 0.0)) fail("ripple filter cutoff must be positive");

    std::unordered_set<std::string> ids;
    for (const auto& f : s.ac) {
        validate(f.feeder);
        if (!(f.feeder.line.x > 0.0)) fail("ac feeder '" + f.feeder.id + "': simulation needs x_ohm > 0");
        if (f.mode == ControlMode::droop) fail("ac feeder '" + f.feeder.id + "': droop mode is DC only");
        if (!ids.insert(f.feeder.id).second) fail("duplicate feeder id '" + f.feeder.id + "'");
    }
    if (!s.ac.empty() && !(s.v_bus.magnitude() > 0.0)) fail("ac bus voltage must be positive");
    for (const auto& f : s.dc) {
        validate(f.feeder);
        if (f.droop_slope < 0.0) fail("dc feeder '" + f.feeder.id + "': droop slope must be non-negative");
        if (!ids.insert(f.feeder.id).second) fail("duplicate feeder id '" + f.feeder.id + "'");
    }
    std::unordered_set<std::string> loads;
    for (const auto& l : s.hub.loads) {
        validate(l.model);
        if (!loads.insert(l.id).second) fail("duplicate load id '" + l.id + "'");
    }

    double prev = 0.0;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const auto& e = s.events[i];
        const std::string where = "event " + std::to_string(i);
        if (e.time < prev) fail(where + ": events must be time-ordered");
        if (e.time < 0.0 || e.time > s.duration) fail(where + ": time outside [0, duration]");
        prev = e.time;
        const auto& target = event_target(e.kind);
        if (std::holds_alternative<event::LoadStep>(e.kind)) {
            if (!loads.contains(target)) fail(where + ": unknown load '" + target + "'");
            validate(std::get<event::LoadStep>(e.kind).model);
        } else if (!ids.contains(target)) {
            fail(where + ": unknown feeder '" + target + "'");
        }
        if (const auto* sag = std::get_if<event::VoltageSag>(&e.kind)) {
            if (!(sag->fraction > 0.0 && sag->fraction <= 1.0)) fail(where + ": sag fraction must lie in (0, 1]");
            if (!(sag->duration >= 0.0)) fail(where + ": sag duration must be non-negative");
        }
        if (const auto* r = std::get_if<event::RippleEnable>(&e.kind)) {
            if (!(r->omega > 0.0)) fail(where + ": ripple omega must be positive");
            if (!find_dc(s.dc, r->feeder)) fail(where + ": ripple applies to dc feeders only");
        }
        if (std::holds_alternative<event::QRefStep>(e.kind) && !find_ac(s.ac, target)) {
            fail(where + ": q_ref_step applies to ac feeders only");
        }
        if (const auto* z = std::get_if<event::ImpedanceChange>(&e.kind)) {
            if (find_ac(s.ac, z->feeder) && !(z->x_ohm > 0.0)) fail(where + ": x_ohm must be positive");
            if (!(z->r_ohm >= 0.0)) fail(where + ": r_ohm must be non-negative");
        }
    }
}

Network Network::from(const Scenario& s) {
    Network n;
    n.ac = s.ac;
    n.dc = s.dc;
    n.ac_cond.resize(s.ac.size());
    n.dc_cond.resize(s.dc.size());
    n.loads = s.hub.loads;
    n.c_dc = s.hub.params.c_dc;
    return n;
}

double Network::ac_sag_factor(std::size_t k, double t) const {
    const auto& c = ac_cond[k];
    return t < c.sag_until ? 1.0 - c.sag_fraction : 1.0;
}

double Network::dc_source_voltage(std::size_t k, double t) const {
    const auto& c = dc_cond[k];
    double v = dc[k].feeder.source_v;
    if (t < c.sag_until) v *= 1.0 - c.sag_fraction;
    if (c.ripple_v != 0.0) v += c.ripple_v * std::sin(c.ripple_omega * t);
    return v;
}

Network apply_event(Network net, const Event& e) {
    net.now = e.time;
    const auto& target = event_target(e.kind);
    const auto dc = find_dc(net.dc, target);
    const auto ac = find_ac(net.ac, target);
    const bool is_load = std::holds_alternative<event::LoadStep>(e.kind);
    if (!is_load && !dc && !ac) fail("unknown feeder '" + target + "'");

    std::visit(overloaded{
                   [&](const event::PRefStep& ev) {
                       if (dc) net.dc[*dc].p_ref = ev.watts;
                       else net.ac[*ac].feeder.p_ref = ev.watts;
                   },
                   [&](const event::QRefStep& ev) {
                       if (!ac) fail("q_ref_step needs an ac feeder");
                       net.ac[*ac].feeder.q_ref = ev.vars;
                   },
                   [&](const event::LoadStep& ev) {
                       auto it = std::find_if(net.loads.begin(), net.loads.end(),
                                              [&](const HubLoad& l) { return l.id == ev.load; });
                       if (it == net.loads.end()) fail("unknown load '" + ev.load + "'");
                       it->model = ev.model;
                   },
                   [&](const event::VoltageSag& ev) {
                       auto& c = dc ? net.dc_cond[*dc] : net.ac_cond[*ac];
                       c.sag_fraction = ev.fraction;
                       c.sag_until = e.time + ev.duration;
                   },
                   [&](const event::RippleEnable& ev) {
                       if (!dc) fail("ripple_enable needs a dc feeder");
                       auto& c = net.dc_cond[*dc];
                       c.ripple_v = ripple_voltage(ev.delta_i, ev.omega, net.c_dc);
                       c.ripple_omega = ev.omega;
                   },
                   [&](const event::ImpedanceChange& ev) {
                       if (dc) {
                           net.dc[*dc].feeder.r_ohm = ev.r_ohm;
                           if (ev.l_henry > 0.0) net.dc[*dc].feeder.l_henry = ev.l_henry;
                       } else {
                           net.ac[*ac].feeder.line = {ev.r_ohm, ev.x_ohm};
                       }
                   },
                   [&](const event::FeederBypass&) {
                       if (dc) net.dc_cond[*dc].bypassed = true;
                       else net.ac_cond[*ac].bypassed = true;
                   },
               },
               e.kind);
    return net;
}

std::span<const double> Trace::column(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) return columns[k];
    throw std::out_of_range("trace has no signal '" + name + "'");
}

bool Trace::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

// Per-run working state. Lives only inside run_scenario.
class Engine {
public:
    explicit Engine(const Scenario& s)
        : s_(s), net_(Network::from(s)), omega_(angular_frequency(s.grid_hz)) {
        nd_ = net_.dc.size();
        na_ = net_.ac.size();
        has_hub_ = nd_ > 0 || !s.hub.loads.empty() || s.hub.afe.enabled || s.hub.bess.enabled;
        x_.assign(1 + nd_ + 2 * na_, 0.0);
        x_[0] = s.hub.v_dc_initial > 0.0 ? s.hub.v_dc_initial : s.hub.params.v_dc_nominal;
        for (std::size_t k = 0; k < nd_; ++k) x_[1 + k] = net_.dc[k].feeder.i_meas;
        filters_.assign(nd_, RippleFilter(s.controller.ripple_cutoff_hz, s.dt));
        dc_inj_.assign(nd_, 0.0);
        dc_src_.assign(nd_, 0.0);
        dc_iref_.assign(nd_, 0.0);
        ac_inj_.assign(na_, Phasor{});
        ac_iref_.assign(na_, DqPair{});
        ac_imeas_.assign(na_, DqPair{});
        const double tau = 1.0 / (2.0 * std::numbers::pi * s.hub.dab_bandwidth_hz);
        dab_alpha_ = s.dt / (tau + s.dt);
        afe_v_ref_ = s.hub.afe.v_ref > 0.0 ? s.hub.afe.v_ref : s.hub.params.v_dc_nominal;
        if (s.hub.bess.enabled) {
            bess_.capacity = s.hub.params.q_battery;
            bess_.charge = s.hub.bess.soc_initial * bess_.capacity;
            bess_.voltage = s.hub.params.v_battery;
            bess_.power_limit = s.hub.params.p_battery_limit;
        }
        for (std::size_t k = 0; k < nd_; ++k) dc_src_[k] = net_.dc_source_voltage(k, 0.0);
        setup_trace();
    }

    Trace run() {
        const auto nticks = static_cast<std::uint64_t>(std::llround(s_.duration / s_.dt));
        const auto every = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(s_.sample_period / s_.dt)));
        trace_.sample_period = static_cast<double>(every) * s_.dt;
        record(0.0);

        std::size_t next_event = 0;
        for (std::uint64_t n = 0; n < nticks; ++n) {
            const double t = static_cast<double>(n) * s_.dt;
            while (next_event < s_.events.size() && s_.events[next_event].time <= t + 0.5 * s_.dt) {
                net_ = apply_event(std::move(net_), s_.events[next_event]);
                ++next_event;
            }
            control(t);
            const bool finite = rk_.step(x_, t, s_.dt, [this](double tt, std::span<const double> xs, std::span<double> d) {
                derivative(tt, xs, d);
            });
            const double t_next = static_cast<double>(n + 1) * s_.dt;
            if (!finite) {
                trace_.verdict = Verdict::diverged;
                trace_.failure_tick = n;
                break;
            }
            if (has_hub_ && x_[0] < s_.hub.collapse_fraction * s_.hub.params.v_dc_nominal) {
                trace_.verdict = Verdict::collapsed;
                trace_.failure_tick = n;
                record(t_next);
                break;
            }
            if ((n + 1) % every == 0) record(t_next);
        }
        if (s_.compare_closed_form && na_ > 0) trace_.closed_form_max_gap = cf_gap_;
        return std::move(trace_);
    }

private:
    double load_current_total(double v, double t) const {
        double i = 0.0;
        for (const auto& l : net_.loads) i += load_current(l.model, v, t, s_.hub.cpl_floor);
        return i;
    }

    void derivative(double t, std::span<const double> x, std::span<double> d) const {
        const double v_dc = x[0];
        double into_link = i_afe_ + i_bess_;
        for (std::size_t k = 0; k < nd_; ++k) {
            const auto& f = net_.dc[k].feeder;
            const double i = x[1 + k];
            const double v_src = net_.dc[k].mode == ControlMode::droop ? dc_src_[k] : net_.dc_source_voltage(k, t);
            // The module aids the feeder current, hence the negated injection.
            d[1 + k] = line_current_derivative(f.l_henry, f.r_ohm, i, v_src - v_dc, -dc_inj_[k]);
            into_link += i;
        }
        const double out_of_link = load_current_total(v_dc, t) + dab_power_ / std::max(v_dc, s_.hub.cpl_floor);
        d[0] = has_hub_ ? dc_link_derivative(net_.c_dc, into_link, out_of_link) : 0.0;

        for (std::size_t k = 0; k < na_; ++k) {
            const auto& f = net_.ac[k].feeder;
            const Complex i{x[1 + nd_ + 2 * k], x[2 + nd_ + 2 * k]};
            const Complex v_k = net_.ac_sag_factor(k, t) * f.source.complex();
            const Complex drive = v_k - s_.v_bus.complex() - ac_inj_[k].complex();
            const Complex di = (drive - f.line.complex() * i) / f.line.inductance(omega_);
            d[1 + nd_ + 2 * k] = di.real();
            d[2 + nd_ + 2 * k] = di.imag();
        }
    }

    void control(double t) {
        const double v_dc = x_[0];
        double total = 0.0;
        for (std::size_t k = 0; k < nd_; ++k) total += x_[1 + k];

        for (std::size_t k = 0; k < nd_; ++k) {
            auto& cfg = net_.dc[k];
            const double i = x_[1 + k];
            const double v_src = net_.dc_source_voltage(k, t);
            const double ripple = filters_[k].update(v_src);
            dc_src_[k] = v_src;
            dc_iref_[k] = cfg.ref_mode == RefMode::share ? cfg.share * total
                                                         : cfg.p_ref / s_.hub.params.v_dc_nominal;
            if (cfg.mode == ControlMode::droop) {
                dc_src_[k] = droop_step(v_src, cfg.droop_slope, i);
                dc_inj_[k] = 0.0;
                continue;
            }
            if (cfg.mode == ControlMode::none || net_.dc_cond[k].bypassed) {
                dc_inj_[k] = 0.0;
                continue;
            }
            double v_mm = 0.0;
            if (cfg.mismatch_feedforward) {
                const double v_hub = s_.hub.params.v_dc_nominal;
                v_mm = sign_of(v_hub - cfg.feeder.source_v) * dc_mismatch(v_hub, cfg.feeder.source_v);
            }
            dc_inj_[k] = dc_injection_step(cfg.feeder.module, {dc_iref_[k], i, ripple, v_dc, v_mm}, s_.dt);
        }

        double module_power = 0.0;
        for (std::size_t k = 0; k < nd_; ++k) module_power += dc_inj_[k] * x_[1 + k];
        dab_power_ += dab_alpha_ * (module_power - dab_power_);

        for (std::size_t k = 0; k < na_; ++k) {
            auto& cfg = net_.ac[k];
            const auto& f = cfg.feeder;
            const Complex v_k = net_.ac_sag_factor(k, t) * f.source.complex();
            const double delta = std::arg(v_k);
            const Complex i_frame = Complex{x_[1 + nd_ + 2 * k], x_[2 + nd_ + 2 * k]} * std::polar(1.0, -delta);
            ac_imeas_[k] = {i_frame.real(), -i_frame.imag()};
            ac_iref_[k] = ac_reference_currents(f.p_ref, f.q_ref, std::abs(v_k));
            if (cfg.mode == ControlMode::none || net_.ac_cond[k].bypassed) {
                ac_inj_[k] = {};
                continue;
            }
            const double zang = impedance_angle(f.line);
            DqPair ff{};
            if (cfg.mismatch_feedforward) {
                const Complex dv = v_k - s_.v_bus.complex();
                const Complex u = std::conj(-dv * std::polar(1.0, -(zang + delta)));
                ff = {u.real(), u.imag()};
            }
            const DqInjection u = ac_pi_step(cfg.feeder.module, ac_iref_[k], ac_imeas_[k], ff, s_.dt);
            const Complex cmd = Complex{u.d, u.q} * std::polar(1.0, -zang);
            ac_inj_[k] = injection_phasor({cmd.real(), cmd.imag()}, delta);
        }

        if (s_.hub.afe.enabled) {
            const auto& a = s_.hub.afe;
            const double e = afe_v_ref_ - v_dc;
            afe_integrator_ += e * s_.dt;
            afe_i_d_ = a.k_p * e + a.k_i * afe_integrator_;
            afe_i_q_ = a.q_ref / (1.5 * a.v_d);
            const double p = afe_power_aligned(a.v_d, afe_i_d_);
            i_afe_ = a.loss_factor * p / std::max(v_dc, s_.hub.cpl_floor);
        }
        if (s_.hub.bess.enabled) {
            bess_ = bess_step(bess_, s_.hub.bess.p_request, s_.dt);
            i_bess_ = bess_.power / std::max(v_dc, s_.hub.cpl_floor);
        }
    }

    void setup_trace() {
        auto& n = trace_.names;
        n.push_back("v_dc");
        for (const auto& f : net_.dc) {
            n.push_back("i_" + f.feeder.id);
            n.push_back("i_ref_" + f.feeder.id);
            n.push_back("v_inj_" + f.feeder.id);
        }
        for (const auto& f : net_.ac) {
            const auto& id = f.feeder.id;
            for (const char* p : {"p_", "q_", "i_d_", "i_q_", "i_ref_d_", "i_ref_q_", "v_inj_d_", "v_inj_q_"})
                n.push_back(p + id);
        }
        if (s_.hub.afe.enabled) {
            n.push_back("p_afe");
            n.push_back("q_afe");
        }
        if (s_.hub.bess.enabled) {
            n.push_back("p_bess");
            n.push_back("soc");
        }
        if (has_hub_) n.push_back("balance_residual");
        trace_.columns.resize(n.size());
    }

    void record(double t) {
        std::size_t c = 0;
        auto put = [&](double v) { trace_.columns[c++].push_back(v); };
        trace_.time.push_back(t);
        const double v_dc = x_[0];
        put(v_dc);

        std::vector<double> outflows;
        outflows.reserve(nd_ + 1);
        for (std::size_t k = 0; k < nd_; ++k) {
            const double i = x_[1 + k];
            put(i);
            put(dc_iref_[k]);
            put(dc_inj_[k]);
            // Export orientation: current leaving the hub, module voltage drawn from it.
            outflows.push_back(dc_feeder_power(v_dc, -dc_inj_[k], -i));
        }

        for (std::size_t k = 0; k < na_; ++k) {
            const auto& f = net_.ac[k].feeder;
            const Phasor v_k = net_.ac_sag_factor(k, t) * f.source;
            const Phasor i{x_[1 + nd_ + 2 * k], x_[2 + nd_ + 2 * k]};
            const auto pq = feeder_power_exact(v_k, i);
            put(pq.p);
            put(pq.q);
            put(ac_imeas_[k].d);
            put(ac_imeas_[k].q);
            put(ac_iref_[k].d);
            put(ac_iref_[k].q);
            const Complex inj_frame = ac_inj_[k].complex() * std::polar(1.0, -v_k.angle());
            put(inj_frame.real());
            put(inj_frame.imag());
            if (s_.compare_closed_form && i.magnitude() > 0.0) {
                cf_gap_ = std::max(cf_gap_, closed_form_gap(v_k, s_.v_bus, ac_inj_[k], f.line).relative_gap);
            }
        }

        const double p_afe_dc = v_dc * i_afe_;
        const double p_bess_dc = v_dc * i_bess_;
        if (s_.hub.afe.enabled) {
            const auto pq = afe_power(s_.hub.afe.v_d, 0.0, afe_i_d_, afe_i_q_);
            put(pq.p);
            put(pq.q);
        }
        if (s_.hub.bess.enabled) {
            put(bess_.power);
            put(bess_.soc());
        }
        if (has_hub_) {
            outflows.push_back(v_dc * load_current_total(v_dc, t));
            put(bus_balance_residual(p_afe_dc, p_bess_dc, outflows));
        }
    }

    const Scenario& s_;
    Network net_;
    double omega_;
    std::size_t nd_ = 0, na_ = 0;
    bool has_hub_ = false;
    std::vector<double> x_;
    Rk4 rk_;
    std::vector<RippleFilter> filters_;
    std::vector<double> dc_inj_, dc_src_, dc_iref_;
    std::vector<Phasor> ac_inj_;
    std::vector<DqPair> ac_iref_, ac_imeas_;
    double afe_v_ref_ = 0.0, afe_integrator_ = 0.0, afe_i_d_ = 0.0, afe_i_q_ = 0.0;
    double i_afe_ = 0.0, i_bess_ = 0.0;
    double dab_power_ = 0.0, dab_alpha_ = 1.0;
    BessState bess_;
    double cf_gap_ = 0.0;
    Trace trace_;
};

}  // namespace

Trace run_scenario(const Scenario& s) {
    validate(s);
    return Engine(s).run();
}

double ripple_amplitude(std::span<const double> signal, double sample_period, double f_hz) {
    if (!(sample_period > 0.0) || !(f_hz > 0.0)) {
        throw std::invalid_argument("ripple_amplitude: sample period and frequency must be positive");
    }
    const double per_period = 1.0 / (f_hz * sample_period);
    const double periods = std::floor(static_cast<double>(signal.size()) / per_period + 1e-9);
    if (periods < 10.0) throw std::invalid_argument("ripple_amplitude: need at least 10 periods");
    const auto m = static_cast<std::size_t>(std::llround(periods * per_period));
    const auto window = signal.subspan(signal.size() - m);
    const double w = 2.0 * std::numbers::pi * f_hz * sample_period;
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
        re += window[n] * std::cos(w * static_cast<double>(n));
        im -= window[n] * std::sin(w * static_cast<double>(n));
    }
    return 2.0 * std::hypot(re, im) / static_cast<double>(m);
}

SmallSignalParams small_signal_params(const Scenario& s, const DcFeederConfig& f) {
    const auto& m = f.feeder.module;
    return {f.feeder.l_henry, f.feeder.r_ohm, s.hub.params.c_dc, m.k_p, m.k_i, m.k_l, m.k_c, m.k_r,
            s.hub.vic_loop_z};
}

namespace {

std::size_t tail_start(const Trace& t, double fraction) {
    const auto n = t.time.size();
    return n - std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(n) * fraction));
}

double tail_mean(std::span<const double> x, std::size_t from) {
    double acc = 0.0;
    for (std::size_t i = from; i < x.size(); ++i) acc += x[i];
    return acc / static_cast<double>(x.size() - from);
}

}  // namespace

RunSummary summarize(const Scenario& s, const Trace& t) {
    RunSummary out;
    out.verdict = t.verdict;
    out.closed_form_max_gap = t.closed_form_max_gap;
    if (t.time.empty()) return out;
    const std::size_t last = t.time.size() - 1;

    std::optional<double> ripple_start;
    for (const auto& e : s.events) {
        if (const auto* r = std::get_if<event::RippleEnable>(&e.kind)) {
            out.ripple_hz = r->omega / (2.0 * std::numbers::pi);
            ripple_start = e.time;
        }
    }
    auto ripple_of = [&](std::span<const double> x) -> std::optional<double> {
        if (!ripple_start || t.verdict != Verdict::completed) return std::nullopt;
        const auto first = static_cast<std::size_t>(
            std::lower_bound(t.time.begin(), t.time.end(), *ripple_start) - t.time.begin());
        try {
            return ripple_amplitude(x.subspan(first), t.sample_period, *out.ripple_hz);
        } catch (const std::invalid_argument&) {
            return std::nullopt;
        }
    };

    const auto v_dc = t.column("v_dc");
    for (const auto& f : s.dc) {
        FeederSummary fs;
        fs.id = f.feeder.id;
        const auto i = t.column("i_" + fs.id);
        const auto iref = t.column("i_ref_" + fs.id);
        const auto vinj = t.column("v_inj_" + fs.id);
        fs.final_current = i[last];
        fs.ripple_amplitude = ripple_of(i);
        if (f.mode == ControlMode::series_module) {
            fs.i_ref = iref[last];
            const auto params = small_signal_params(s, f);
            fs.stability = classify_stability(params);
            fs.vic_stable = vic_stable(params.c, params.k_c, params.z);
            if (iref[last] != 0.0) {
                fs.steady_state_error = std::abs(i[last] - iref[last]) / std::abs(iref[last]);
                double t_step = 0.0;
                for (const auto& e : s.events) {
                    if (const auto* p = std::get_if<event::PRefStep>(&e.kind); p && p->feeder == fs.id) t_step = e.time;
                }
                std::optional<std::size_t> last_bad;
                for (std::size_t n = 0; n <= last; ++n) {
                    if (t.time[n] < t_step) continue;
                    if (std::abs(i[n] - iref[n]) > kSettlingBand * std::abs(iref[n])) last_bad = n;
                }
                if (!last_bad) fs.settling_time = 0.0;
                else if (*last_bad < last) fs.settling_time = t.time[*last_bad + 1] - t_step;
            }
        }
        fs.partial_power_fraction = v_dc[last] > 0.0 ? partial_power_metrics(v_dc[last], vinj[last], i[last]).fraction
                                                     : std::nullopt;
        out.dc.push_back(std::move(fs));
    }

    for (const auto& f : s.ac) {
        FeederSummary fs;
        fs.id = f.feeder.id;
        fs.final_current = t.column("i_d_" + fs.id)[last];
        fs.i_ref = t.column("i_ref_d_" + fs.id)[last];
        if (*fs.i_ref != 0.0) fs.steady_state_error = std::abs(fs.final_current - *fs.i_ref) / std::abs(*fs.i_ref);
        const double vd = t.column("v_inj_d_" + fs.id)[last];
        const double vq = t.column("v_inj_q_" + fs.id)[last];
        const double id = t.column("i_d_" + fs.id)[last];
        const double iq = t.column("i_q_" + fs.id)[last];
        fs.partial_power_fraction =
            partial_power_metrics(s.v_bus.magnitude(), std::hypot(vd, vq), std::hypot(id, iq)).fraction;
        out.ac.push_back(std::move(fs));
    }

    if (s.dc.size() >= 2) {
        const auto from = tail_start(t, 0.1);
        double lo = INFINITY, hi = -INFINITY, mean = 0.0;
        for (const auto& f : s.dc) {
            const double m = tail_mean(t.column("i_" + f.feeder.id), from);
            lo = std::min(lo, m);
            hi = std::max(hi, m);
            mean += std::abs(m);
        }
        mean /= static_cast<double>(s.dc.size());
        if (mean > 0.0) out.sharing_error = (hi - lo) / mean;
    }

    if (ripple_start) out.v_dc_ripple_amplitude = ripple_of(v_dc);

    if (t.has("balance_residual")) {
        double peak = 0.0;
        for (std::size_t n = 0; n <= last; ++n) {
            for (const auto& f : s.dc) peak = std::max(peak, std::abs(v_dc[n] * t.column("i_" + f.feeder.id)[n]));
            if (t.has("p_afe")) peak = std::max(peak, std::abs(t.column("p_afe")[n]));
        }
        if (peak > 0.0) {
            const auto res = t.column("balance_residual");
            double worst = 0.0;
            for (std::size_t n = tail_start(t, 0.1); n <= last; ++n) worst = std::max(worst, std::abs(res[n]));
            out.max_balance_residual_ratio = worst / peak;
        }
    }
    return out;
}

Scenario without_ripple_feedforward(Scenario s) {
    for (auto& f : s.dc) f.feeder.module.k_r = 0.0;
    return s;
}

Scenario as_droop(Scenario s) {
    for (auto& f : s.dc) f.mode = ControlMode::droop;
    return s;
}

}  // namespace gridrouter
