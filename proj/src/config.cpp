#include "ringsqueeze/config.hpp"
#include "ringsqueeze/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ringsqueeze {

using nlohmann::json;
namespace u = units;

const char* bin_name(Bin b) {
    switch (b) {
        case Bin::LI: return "LI";
        case Bin::P1: return "P1";
        case Bin::S: return "S";
        case Bin::P2: return "P2";
        case Bin::RI: return "RI";
    }
    return "?";
}

Bin bin_from_name(const std::string& name) {
    for (Bin b : all_bins)
        if (name == bin_name(b)) return b;
    throw ConfigError("unknown bin label: " + name);
}

const char* element_name(Element e) {
    switch (e) {
        case Element::waveguide: return "waveguide";
        case Element::primary: return "primary";
        case Element::auxiliary: return "auxiliary";
    }
    return "?";
}

Element element_from_name(const std::string& name) {
    if (name == "waveguide") return Element::waveguide;
    if (name == "primary") return Element::primary;
    if (name == "auxiliary") return Element::auxiliary;
    throw ConfigError("unknown element: " + name);
}

std::vector<double> RingSpec::resolved_self_couplings() const {
    if (!phantom_self_couplings.empty()) return phantom_self_couplings;
    std::vector<double> s(static_cast<size_t>(n_phantom),
                          std::pow(round_trip_attenuation, 1.0 / n_phantom));
    return s;
}

std::vector<double> RingSpec::resolved_positions() const {
    if (!phantom_positions.empty()) return phantom_positions;
    std::vector<double> p(static_cast<size_t>(n_phantom));
    for (int i = 0; i < n_phantom; ++i) p[i] = length * i / n_phantom;
    return p;
}

const RingSpec& SystemConfig::ring(Element e) const {
    if (e == Element::primary) return primary;
    if (e == Element::auxiliary) return auxiliary;
    throw ConfigError("waveguide is not a ring");
}

RingSpec& SystemConfig::ring(Element e) {
    return const_cast<RingSpec&>(static_cast<const SystemConfig*>(this)->ring(e));
}

const ResonanceBin& SystemConfig::bin(Bin b) const {
    if (const ResonanceBin* p = find_bin(b)) return *p;
    throw ConfigError(std::string("bin not configured: ") + bin_name(b));
}

ResonanceBin* SystemConfig::find_bin(Bin b) {
    for (auto& rb : bins)
        if (rb.label == b) return &rb;
    return nullptr;
}

const ResonanceBin* SystemConfig::find_bin(Bin b) const {
    return const_cast<SystemConfig*>(this)->find_bin(b);
}

static bool touches(const CouplerSpec& c, Element e) {
    return c.a.element == e || c.b.element == e;
}

const CouplerSpec& SystemConfig::waveguide_coupler() const {
    for (const auto& c : couplers)
        if (touches(c, Element::waveguide)) return c;
    throw ConfigError("no waveguide coupler configured");
}

const CouplerSpec& SystemConfig::ring_coupler() const {
    for (const auto& c : couplers)
        if (touches(c, Element::primary) && touches(c, Element::auxiliary)) return c;
    throw ConfigError("no primary-auxiliary coupler configured");
}

// ---------------------------------------------------------------- validation

static void validate_ring(const RingSpec& r, ValidationReport& rep) {
    const std::string who = element_name(r.label);
    if (r.length <= 0.0) throw ConfigError(who + ": length must be positive");
    if (r.round_trip_attenuation <= 0.0 || r.round_trip_attenuation > 1.0)
        throw ConfigError(who + ": round_trip_attenuation must lie in (0, 1]");
    if (r.n_phantom < 1) throw ConfigError(who + ": need at least one phantom site");
    const auto sig = r.resolved_self_couplings();
    if (static_cast<int>(sig.size()) != r.n_phantom)
        throw ConfigError(who + ": phantom_self_couplings size mismatch");
    double prod = 1.0;
    for (double s : sig) {
        if (s <= 0.0 || s > 1.0)
            throw InvalidCoupling(who + ": phantom self-coupling outside (0, 1]");
        prod *= s;
    }
    if (std::abs(prod - r.round_trip_attenuation) > 1e-12)
        throw InvalidCoupling(who + ": product of phantom self-couplings != round-trip attenuation");
    const auto pos = r.resolved_positions();
    if (static_cast<int>(pos.size()) != r.n_phantom)
        throw ConfigError(who + ": phantom_positions size mismatch");
    for (size_t i = 0; i < pos.size(); ++i) {
        if (pos[i] < 0.0 || pos[i] >= r.length)
            throw ConfigError(who + ": phantom position outside [0, length)");
        if (i > 0 && pos[i] <= pos[i - 1])
            throw ConfigError(who + ": phantom positions must be strictly increasing");
    }
    if (pos[0] != 0.0)
        throw MisalignedPhantom(who + ": first phantom must sit at the element origin");
    for (double s : sig)
        if (s == 1.0)
            rep.warnings.push_back(who + ": lossless phantom will be floored internally");
}

static void require_phantom_at(const RingSpec& r, double pos, const char* what) {
    const double tol = 1e-12 + 1e-9 * r.length;
    for (double p : r.resolved_positions())
        if (std::abs(p - pos) <= tol) return;
    throw MisalignedPhantom(std::string(element_name(r.label)) + ": " + what +
                            " position has no phantom site");
}

ValidationReport validate_config(const SystemConfig& cfg) {
    ValidationReport rep;
    if (cfg.dispersion.v_group <= 0.0)
        throw ConfigError("dispersion: group velocity must be positive");
    if (cfg.dispersion.omega_ref <= 0.0)
        throw ConfigError("dispersion: reference frequency must be positive");
    if (cfg.gamma_nl < 0.0) throw ConfigError("gamma_nl must be non-negative");
    if (cfg.primary.label != Element::primary || cfg.auxiliary.label != Element::auxiliary)
        throw ConfigError("ring labels must be primary / auxiliary");
    validate_ring(cfg.primary, rep);
    validate_ring(cfg.auxiliary, rep);

    int n_wg = 0, n_rr = 0;
    for (const auto& c : cfg.couplers) {
        if (c.self_coupling < 0.0 || c.self_coupling > 1.0 || c.cross_coupling < 0.0)
            throw InvalidCoupling("coupler amplitudes out of range");
        const double unit = c.self_coupling * c.self_coupling + c.cross_coupling * c.cross_coupling;
        if (std::abs(unit - 1.0) > 1e-12)
            throw InvalidCoupling("coupler is not power conserving: s^2 + c^2 != 1");
        if (c.a.element == c.b.element)
            throw ConfigError("coupler endpoints must join distinct elements");
        const bool wg = touches(c, Element::waveguide);
        const bool rr = touches(c, Element::primary) && touches(c, Element::auxiliary);
        if (wg && touches(c, Element::auxiliary))
            throw ConfigError("waveguide couples to the primary ring only");
        if (wg) ++n_wg;
        if (rr) ++n_rr;
        for (const CouplerEndpoint* ep : {&c.a, &c.b}) {
            if (ep->element == Element::waveguide) continue;
            const RingSpec& r = cfg.ring(ep->element);
            if (ep->position < 0.0 || ep->position >= r.length)
                throw ConfigError("coupler position outside ring");
            require_phantom_at(r, ep->position, "coupler");
        }
    }
    if (n_wg != 1) throw ConfigError("exactly one waveguide coupler is required");
    if (n_rr != 1) throw ConfigError("exactly one primary-auxiliary coupler is required");

    if (!cfg.bins.empty()) {
        if (cfg.bins.size() != all_bins.size())
            throw ConfigError("bin list must cover all five bins when present");
        std::vector<char> seen(all_bins.size(), 0);
        for (const auto& b : cfg.bins) {
            if (seen[static_cast<int>(b.label)]++)
                throw ConfigError(std::string("duplicate bin: ") + bin_name(b.label));
            if (b.n_k < 1 || b.n_k % 2 == 0)
                throw ConfigError(std::string(bin_name(b.label)) + ": n_k must be odd and positive");
            if (b.dk <= 0.0 || b.span_omega <= 0.0)
                throw ConfigError(std::string(bin_name(b.label)) + ": bin extent must be positive");
        }
        int nk_q = cfg.bin(Bin::LI).n_k;
        if (cfg.bin(Bin::S).n_k != nk_q || cfg.bin(Bin::RI).n_k != nk_q)
            throw ConfigError("generated bins LI, S, RI must share one n_k");
        auto sorted = cfg.bins;
        std::sort(sorted.begin(), sorted.end(), [](const ResonanceBin& x, const ResonanceBin& y) {
            return x.center_omega < y.center_omega;
        });
        for (size_t i = 0; i + 1 < sorted.size(); ++i) {
            const double hi = sorted[i].center_omega + 0.5 * sorted[i].span_omega;
            const double lo = sorted[i + 1].center_omega - 0.5 * sorted[i + 1].span_omega;
            if (hi > lo)
                throw BinOverlap(std::string("bins overlap: ") + bin_name(sorted[i].label) +
                                 " and " + bin_name(sorted[i + 1].label));
        }
    }

    for (const auto& p : cfg.pumps) {
        if (!is_pump_bin(p.target)) throw ConfigError("pump must target P1 or P2");
        if (p.energy < 0.0) throw ConfigError("pump energy must be non-negative");
        if (p.duration <= 0.0) throw ConfigError("pump duration must be positive");
        const double vg = cfg.dispersion.v_group;
        if (p.delay_pos > -4.0 * vg * p.duration)
            rep.warnings.push_back(std::string(bin_name(p.target)) +
                                   " pump: pulse not fully upstream at t0");
    }
    if (cfg.time.dt < 0.0 || cfg.time.t_final < 0.0)
        throw ConfigError("time grid entries must be non-negative");
    return rep;
}

// ------------------------------------------------------------------- JSON IO

static json ring_to_json(const RingSpec& r) {
    json j;
    j["label"] = element_name(r.label);
    j["length_um"] = u::m_to_um(r.length);
    j["round_trip_attenuation"] = r.round_trip_attenuation;
    j["n_phantom"] = r.n_phantom;
    if (!r.phantom_self_couplings.empty()) j["phantom_self_couplings"] = r.phantom_self_couplings;
    if (!r.phantom_positions.empty()) {
        json arr = json::array();
        for (double p : r.phantom_positions) arr.push_back(u::m_to_um(p));
        j["phantom_positions_um"] = arr;
    }
    j["phase_offset_rad"] = r.phase_offset;
    return j;
}

static RingSpec ring_from_json(const json& j) {
    RingSpec r;
    r.label = element_from_name(j.at("label").get<std::string>());
    r.length = u::um_to_m(j.at("length_um").get<double>());
    r.round_trip_attenuation = j.at("round_trip_attenuation").get<double>();
    r.n_phantom = j.at("n_phantom").get<int>();
    if (j.contains("phantom_self_couplings"))
        r.phantom_self_couplings = j["phantom_self_couplings"].get<std::vector<double>>();
    if (j.contains("phantom_positions_um"))
        for (double p : j["phantom_positions_um"]) r.phantom_positions.push_back(u::um_to_m(p));
    r.phase_offset = j.value("phase_offset_rad", 0.0);
    return r;
}

static json coupler_to_json(const CouplerSpec& c) {
    auto ep = [](const CouplerEndpoint& e) {
        return json{{"element", element_name(e.element)}, {"position_um", u::m_to_um(e.position)}};
    };
    return json{{"self_coupling", c.self_coupling},
                {"cross_coupling", c.cross_coupling},
                {"endpoints", json::array({ep(c.a), ep(c.b)})}};
}

static CouplerSpec coupler_from_json(const json& j) {
    CouplerSpec c;
    c.self_coupling = j.at("self_coupling").get<double>();
    c.cross_coupling = j.at("cross_coupling").get<double>();
    const auto& eps = j.at("endpoints");
    if (!eps.is_array() || eps.size() != 2) throw ConfigError("coupler needs two endpoints");
    auto ep = [](const json& je) {
        CouplerEndpoint e;
        e.element = element_from_name(je.at("element").get<std::string>());
        e.position = u::um_to_m(je.at("position_um").get<double>());
        return e;
    };
    c.a = ep(eps[0]);
    c.b = ep(eps[1]);
    return c;
}

static json bin_to_json(const ResonanceBin& b) {
    return json{{"label", bin_name(b.label)},
                {"center_omega_GHz", u::angular_to_ghz(b.center_omega)},
                {"center_k_per_um", u::per_m_to_per_um(b.center_k)},
                {"span_GHz", u::angular_to_ghz(b.span_omega)},
                {"n_k", b.n_k},
                {"dk_per_um", u::per_m_to_per_um(b.dk)}};
}

static ResonanceBin bin_from_json(const json& j) {
    ResonanceBin b;
    b.label = bin_from_name(j.at("label").get<std::string>());
    b.center_omega = u::ghz_to_angular(j.at("center_omega_GHz").get<double>());
    b.center_k = u::per_um_to_per_m(j.at("center_k_per_um").get<double>());
    b.span_omega = u::ghz_to_angular(j.at("span_GHz").get<double>());
    b.n_k = j.at("n_k").get<int>();
    b.dk = u::per_um_to_per_m(j.at("dk_per_um").get<double>());
    return b;
}

static json pump_to_json(const PumpPulse& p) {
    return json{{"target", bin_name(p.target)},
                {"energy_pJ", u::j_to_pj(p.energy)},
                {"duration_ps", u::s_to_ps(p.duration)},
                {"center_k_per_um", u::per_m_to_per_um(p.center_k)},
                {"delay_position_um", u::m_to_um(p.delay_pos)}};
}

static PumpPulse pump_from_json(const json& j) {
    PumpPulse p;
    p.target = bin_from_name(j.at("target").get<std::string>());
    p.energy = u::pj_to_j(j.at("energy_pJ").get<double>());
    p.duration = u::ps_to_s(j.at("duration_ps").get<double>());
    p.center_k = u::per_um_to_per_m(j.at("center_k_per_um").get<double>());
    p.delay_pos = u::um_to_m(j.at("delay_position_um").get<double>());
    return p;
}

static json config_to_json(const SystemConfig& cfg) {
    json j;
    j["dispersion"] = {{"k_ref_per_um", u::per_m_to_per_um(cfg.dispersion.k_ref)},
                       {"omega_ref_GHz", u::angular_to_ghz(cfg.dispersion.omega_ref)},
                       {"group_velocity_um_per_ps", u::m_per_s_to_um_per_ps(cfg.dispersion.v_group)},
                       {"gvd_ps2_per_m", u::si_to_ps2_per_m(cfg.dispersion.gvd)}};
    j["gamma_nl_per_W_m"] = cfg.gamma_nl;
    j["rings"] = json::array({ring_to_json(cfg.primary), ring_to_json(cfg.auxiliary)});
    j["couplers"] = json::array();
    for (const auto& c : cfg.couplers) j["couplers"].push_back(coupler_to_json(c));
    j["bins"] = json::array();
    for (const auto& b : cfg.bins) j["bins"].push_back(bin_to_json(b));
    j["pumps"] = json::array();
    for (const auto& p : cfg.pumps) j["pumps"].push_back(pump_to_json(p));
    j["aux_detuning_GHz"] = u::angular_to_ghz(cfg.aux_detuning);
    j["time"] = {{"t0_ps", u::s_to_ps(cfg.time.t0)},
                 {"dt_ps", u::s_to_ps(cfg.time.dt)},
                 {"t_final_ps", u::s_to_ps(cfg.time.t_final)}};
    return j;
}

static SystemConfig config_from_json(const json& j) {
    SystemConfig cfg;
    const auto& jd = j.at("dispersion");
    cfg.dispersion.k_ref = u::per_um_to_per_m(jd.at("k_ref_per_um").get<double>());
    cfg.dispersion.omega_ref = u::ghz_to_angular(jd.at("omega_ref_GHz").get<double>());
    cfg.dispersion.v_group = u::um_per_ps_to_m_per_s(jd.at("group_velocity_um_per_ps").get<double>());
    cfg.dispersion.gvd = u::ps2_per_m_to_si(jd.value("gvd_ps2_per_m", 0.0));
    cfg.gamma_nl = j.value("gamma_nl_per_W_m", 0.0);
    const auto& rings = j.at("rings");
    if (!rings.is_array() || rings.size() != 2) throw ConfigError("need exactly two rings");
    for (const auto& jr : rings) {
        RingSpec r = ring_from_json(jr);
        if (r.label == Element::primary) cfg.primary = r;
        else if (r.label == Element::auxiliary) cfg.auxiliary = r;
        else throw ConfigError("ring label must be primary or auxiliary");
    }
    for (const auto& jc : j.value("couplers", json::array())) cfg.couplers.push_back(coupler_from_json(jc));
    for (const auto& jb : j.value("bins", json::array())) cfg.bins.push_back(bin_from_json(jb));
    for (const auto& jp : j.value("pumps", json::array())) cfg.pumps.push_back(pump_from_json(jp));
    cfg.aux_detuning = u::ghz_to_angular(j.value("aux_detuning_GHz", 0.0));
    if (j.contains("time")) {
        const auto& jt = j["time"];
        cfg.time.t0 = u::ps_to_s(jt.value("t0_ps", 0.0));
        cfg.time.dt = u::ps_to_s(jt.value("dt_ps", 0.0));
        cfg.time.t_final = u::ps_to_s(jt.value("t_final_ps", 0.0));
    }
    return cfg;
}

std::string dump_config(const SystemConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

SystemConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON parse failure: ") + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON shape failure: ") + e.what());
    }
}

SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void save_config_file(const SystemConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << dump_config(cfg);
}

std::uint64_t config_hash(const SystemConfig& cfg) {
    const std::string s = dump_config(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace ringsqueeze
