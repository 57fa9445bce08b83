// Copyright 2026 The qbc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// qbc: run, inspect and attack the bit commitment protocol.
//
//   qbc run     --s 2000 --fa 0.2 --fb 0.75 --trials 10 --out t.json
//   qbc stats   --theta 0.3927
//   qbc window  --fa 0.2 --fb 0.75 --fc 0 --s 1000
//   qbc analyze t.json
//   qbc attack  typeb-flood --s 2000 --fa 0.2 --fb 0.75 --code-kind random --code-k 20 --code-d 400
//
// Exit status: 0 on success, 2 on invalid configuration or input, 1 on an
// internal failure.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qbc/qbc.hpp"

namespace {

using namespace qbc;
using json = nlohmann::ordered_json;

struct Options {
    std::size_t s = 2000;
    double theta = std::numbers::pi / 4.0;
    double fa = 0.2;
    double fb = 0.75;
    double fc = 0.0;
    std::size_t s_prime = 0;
    std::optional<std::size_t> code_n;
    std::size_t code_k = 8;
    std::optional<std::size_t> code_d;
    std::string code_kind = "block";
    std::string code_file;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    double z = 4.0;
    std::string out;
    bool json = false;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_params(CLI::App *cmd, Options &o) {
    cmd->add_option("--s", o.s, "number of entangled pairs");
    cmd->add_option("--theta", o.theta, "preparation angle in radians");
    cmd->add_option("--fa", o.fa, "frequency of type-a lies");
    cmd->add_option("--fb", o.fb, "frequency of type-b lies");
    cmd->add_option("--fc", o.fc, "frequency of type-c lies");
    cmd->add_option("--s-prime", o.s_prime, "registers Bob leaves unmeasured");
    cmd->add_option("--code-n", o.code_n, "length of synthetic attack instances");
    cmd->add_option("--code-k", o.code_k, "code dimension");
    cmd->add_option("--code-d", o.code_d, "code distance (default: middle of the d-window)");
    cmd->add_option("--code-kind", o.code_kind, "block or random")->check(CLI::IsMember({"block", "random"}));
    cmd->add_option("--code-file", o.code_file, "read the code from a file");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--trials", o.trials, "number of independent trials");
    cmd->add_option("--z", o.z, "tolerance of the statistical checks in standard deviations");
    cmd->add_option("--out", o.out, "write transcripts to this file");
    cmd->add_flag("--json", o.json, "emit JSON");
}

std::optional<lincode::LinearCode> load_code(const Options &o) {
    if (o.code_file.empty()) return std::nullopt;
    std::ifstream in(o.code_file);
    if (!in) throw ConfigError("cannot open code file " + o.code_file);
    try {
        return lincode::read_code(in);
    } catch (const error &e) {
        throw ConfigError(e.what());
    }
}

protocol::Params make_params(const Options &o, bool bob_honest = true) {
    protocol::Params p;
    p.s = o.s;
    p.theta = {o.theta};
    p.f_a = o.fa;
    p.f_b = o.fb;
    p.f_c = o.fc;
    p.s_prime = o.s_prime;
    p.code.kind = o.code_kind == "random" ? protocol::CodeKind::Random : protocol::CodeKind::Block;
    p.code.k = o.code_k;
    p.code.d = o.code_d;
    p.seed = o.seed;
    p.check_z = o.z;
    protocol::validate(p, bob_honest);
    return p;
}

void emit(const Options &o, const json &j, const std::string &text) {
    if (o.json) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << text;
    }
}

double sigma(double rate, double s) { return std::sqrt(rate * (1.0 - rate) / s); }

// run ----------------------------------------------------------------------

int cmd_run(const Options &o) {
    const auto params = make_params(o);
    const auto code = load_code(o);
    if (o.code_n) throw ConfigError("--code-n applies to synthetic attack instances only");

    json transcripts = json::array();
    std::size_t committed = 0, accepted = 0;
    double sum_m = 0.0, sum_l = 0.0, sum_la = 0.0, sum_lb = 0.0, sum_lc = 0.0;
    bool identity_holds = true;
    json aborts = json::object();
    for (std::size_t k = 0; k < o.trials; ++k) {
        auto rng = Rng::for_trial(params.seed, k);
        protocol::AlicePolicy alice;
        protocol::BobPolicy bob;
        auto session = protocol::run_commit(params, alice, bob, rng, code);
        const auto &t = session.transcript;
        const double s = static_cast<double>(params.s);
        sum_m += static_cast<double>(t.M.size()) / s;
        sum_l += static_cast<double>(t.L.size()) / s;
        if (!t.committed()) {
            const auto name = t.aborted_at.value_or("?");
            aborts[name] = aborts.value(name, 0) + 1;
        } else {
            ++committed;
            const auto rc = analysis::residual_accounting(t);
            sum_la += static_cast<double>(rc.l_a_res) / s;
            sum_lb += static_cast<double>(rc.l_b_res) / s;
            sum_lc += static_cast<double>(rc.l_c_res) / s;
            if (rc.l_a_res + rc.l_b_res + rc.l_c_res + rc.h_res + rc.deferred != rc.n) identity_holds = false;
            if (protocol::run_unveil(session, alice, rng).accept) ++accepted;
        }
        if (!o.out.empty()) transcripts.push_back(io::to_json(t));
    }

    if (!o.out.empty()) {
        std::ofstream out(o.out);
        if (!out) throw ConfigError("cannot write " + o.out);
        out << (o.trials == 1 ? transcripts[0] : transcripts).dump(2) << '\n';
    }

    json j;
    j["trials"] = o.trials;
    if (o.trials == 0) {
        emit(o, j, "trials=0\n");
        return 0;
    }
    const double tr = static_cast<double>(o.trials);
    const double s = static_cast<double>(params.s);
    const double nc = std::max<double>(1.0, static_cast<double>(committed));
    auto row = [&](const char *name, double observed, double expected) {
        json r;
        r["name"] = name;
        r["observed"] = observed;
        r["expected"] = expected;
        r["band"] = o.z * sigma(expected, s);
        return r;
    };
    j["committed"] = committed;
    j["accept_rate"] = static_cast<double>(accepted) / tr;
    j["aborts"] = aborts;
    j["rows"] = json::array({
        row("|M|/s", sum_m / tr, protocol::expected_measured_rate(params)),
        row("|L|/s", sum_l / tr, protocol::expected_detected_rate(params)),
        row("l'_a/s", sum_la / nc, params.f_a / 2.0),
        row("l'_b/s", sum_lb / nc, 3.0 * params.f_b / 4.0),
        row("l'_c/s", sum_lc / nc, 3.0 * params.f_c / 4.0),
    });
    j["residual_identity"] = identity_holds;

    std::ostringstream text;
    text << "trials=" << o.trials << " committed=" << committed << " accept_rate=" << j["accept_rate"].get<double>()
         << '\n';
    for (auto it = aborts.begin(); it != aborts.end(); ++it) text << "  aborted at " << it.key() << ": " << *it << '\n';
    text << std::fixed << std::setprecision(5);
    for (const auto &r : j["rows"]) {
        text << "  " << std::left << std::setw(8) << r["name"].get<std::string>() << " observed "
             << r["observed"].get<double>() << "  expected " << r["expected"].get<double>() << " +- "
             << r["band"].get<double>() << '\n';
    }
    text << "  residual identity l'_a + l'_b + l'_c + h = n: " << (identity_holds ? "holds" : "VIOLATED") << '\n';
    emit(o, j, text.str());
    return identity_holds ? 0 : 1;
}

// stats --------------------------------------------------------------------

int cmd_stats(const Options &o) {
    if (!(o.theta > 0.0 && o.theta < std::numbers::pi / 2.0)) throw ConfigError("theta must lie in (0, pi/2)");
    const auto table = analysis::lie_type_probabilities(o.theta);
    const std::map<protocol::LieLabel, std::pair<double, double>> closed{
        {protocol::LieLabel::TypeA, {0.75, 0.5}},   {protocol::LieLabel::TypeB, {0.25, 0.25}},
        {protocol::LieLabel::TypeC, {0.75, 0.25}},  {protocol::LieLabel::Honest, {0.25, 0.0}},
        {protocol::LieLabel::Deferred, {0.5, 0.25}},
    };
    json j;
    j["theta"] = o.theta;
    j["rows"] = json::array();
    std::ostringstream text;
    text << "theta=" << o.theta << '\n' << std::fixed << std::setprecision(12);
    text << "  type      Pr(M)           closed   Pr(L)           closed\n";
    for (const auto &r : table) {
        const auto [cm, cl] = closed.at(r.label);
        json row;
        row["type"] = protocol::to_string(r.label);
        row["pr_m"] = r.in_m;
        row["pr_m_closed"] = cm;
        row["pr_l"] = r.detected;
        row["pr_l_closed"] = cl;
        j["rows"].push_back(row);
        text << "  " << std::left << std::setw(9) << protocol::to_string(r.label) << ' ' << r.in_m << "  "
             << std::setprecision(2) << cm << "     " << std::setprecision(12) << r.detected << "  "
             << std::setprecision(2) << cl << std::setprecision(12) << '\n';
    }
    const double f_h = 1.0 - o.fa - o.fb - o.fc;
    const double agg_m = o.fa * table[0].in_m + o.fb * table[1].in_m + o.fc * table[2].in_m + f_h * table[3].in_m;
    const double agg_l =
        o.fa * table[0].detected + o.fb * table[1].detected + o.fc * table[2].detected + f_h * table[3].detected;
    j["aggregate"] = {{"pr_m", agg_m}, {"pr_l", agg_l}};
    text << "  aggregate at (fa, fb, fc) = (" << std::setprecision(4) << o.fa << ", " << o.fb << ", " << o.fc
         << "): |M|/s=" << std::setprecision(6) << agg_m << " |L|/s=" << agg_l << '\n';
    emit(o, j, text.str());
    return 0;
}

// window -------------------------------------------------------------------

int cmd_window(const Options &o) {
    make_params(o);
    const auto w = analysis::d_window(o.fa, o.fb, o.fc, static_cast<double>(o.s));
    json j;
    j["l_a_res"] = w.l_a_res;
    j["l_b_res"] = w.l_b_res;
    j["l_c_res"] = w.l_c_res;
    j["h"] = w.h;
    j["m"] = w.m;
    j["d_min"] = w.d_min;
    j["d_max"] = w.d_max;
    j["window"] = w.window_nonempty ? "OPEN" : "CLOSED";
    std::ostringstream text;
    text << "d_min=" << w.d_min << " d_max=" << w.d_max << " window=" << (w.window_nonempty ? "OPEN" : "CLOSED")
         << '\n';
    emit(o, j, text.str());
    return 0;
}

// analyze ------------------------------------------------------------------

int cmd_analyze(const Options &o, const std::string &path, std::size_t index) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    protocol::Transcript t;
    try {
        auto doc = json::parse(in);
        if (doc.is_array()) {
            if (index >= doc.size()) throw ConfigError("transcript index out of range");
            doc = doc[index];
        }
        t = io::transcript_from_json(doc);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("malformed transcript: ") + e.what());
    } catch (const error &e) {
        throw ConfigError(e.what());
    }
    if (auto code = load_code(o)) t.code = std::move(code);
    if (!t.code) throw ConfigError("transcript carries no code; pass --code-file");
    if (t.aborted_at) throw ConfigError("transcript aborted at " + *t.aborted_at);

    const auto spec = analysis::rho_spec_from_transcript(t);
    const auto cert = analysis::certify_orthogonality(spec);
    json j;
    j["n"] = spec.sites.size();
    j["orthogonal"] = cert.orthogonal;
    j["feasible0"] = cert.feasible0;
    j["feasible1"] = cert.feasible1;
    std::ostringstream text;
    if (cert.orthogonal) {
        text << "ORTHOGONAL, F=0.0\n";
        j["fidelity"] = 0.0;
    } else {
        j["witness"] = {{"c", cert.witness->first.to_string()},
                        {"c_star", cert.witness->second.to_string()},
                        {"overlap", cert.witness_overlap}};
        text << "NOT ORTHOGONAL, witness c=" << cert.witness->first.to_string()
             << " c*=" << cert.witness->second.to_string() << " overlap=" << cert.witness_overlap << '\n';
    }
    text << "feasible codewords: " << cert.feasible0 << " with c.r=0, " << cert.feasible1 << " with c.r=1\n";
    if (spec.sites.size() <= analysis::max_dense_sites && cert.feasible0 > 0 && cert.feasible1 > 0) {
        const double f = adversary::alice_hjw_precondition_probe(t);
        const double tp = kernel::trace_product(analysis::rho_b(spec, 0), analysis::rho_b(spec, 1));
        j["fidelity"] = f;
        j["trace_product"] = tp;
        text << "F=" << f << " Tr(rho_0 rho_1)=" << tp << '\n';
    } else {
        j["dense"] = nullptr;
        text << "dense check skipped (n=" << spec.sites.size() << ")\n";
    }
    emit(o, j, text.str());
    return 0;
}

// attack -------------------------------------------------------------------

adversary::AttackReport bitflip_trials(const protocol::Params &params, std::size_t trials, bool one_to_zero) {
    adversary::AttackReport rep{"bitflip", trials, 0, 0, 0.0, ""};
    std::size_t u3 = 0, u4b = 0, no_adjacent = 0, skipped = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        auto rng = Rng::for_trial(params.seed, k);
        protocol::AlicePolicy honest;
        protocol::BobPolicy bob;
        auto session = protocol::run_commit(params, honest, bob, rng);
        const auto &t = session.transcript;
        if (!t.committed()) {
            ++skipped;
            continue;
        }
        const auto kept = t.kept_positions();
        std::vector<std::size_t> candidates;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            const auto &site = t.sites[kept[j]];
            if (one_to_zero ? (t.c0[j] == 1 && site.deferred) : (t.c0[j] == 0 && site.label == protocol::LieLabel::TypeB)) {
                candidates.push_back(j);
            }
        }
        if (candidates.empty()) {
            ++skipped;
            continue;
        }
        const auto j = candidates[rng.below(candidates.size())];
        const auto out = adversary::alice_bitflip_attack(session, j, rng);
        if (out.verdict.accept) ++rep.success_count;
        else ++rep.detection_count;
        for (const auto &c : out.verdict.checks) {
            if (c.name == "U3" && !c.pass) ++u3;
            if (c.name == "U4b" && !c.pass) ++u4b;
        }
        if (!out.adjacent_codeword) ++no_adjacent;
    }
    rep.advantage = trials == 0 ? 0.0 : static_cast<double>(rep.success_count) / static_cast<double>(trials);
    rep.notes = std::string(one_to_zero ? "1->0" : "0->1") + " u3_caught=" + std::to_string(u3) +
                " u4b_caught=" + std::to_string(u4b) + " no_adjacent_codeword=" + std::to_string(no_adjacent) +
                " skipped=" + std::to_string(skipped);
    return rep;
}

int cmd_attack(const Options &o, const std::string &name, const std::string &flip) {
    adversary::AttackReport rep;
    if (name == "projector" || name == "projector-oracle" || name == "projector-scrambled") {
        const auto mode = name == "projector"          ? adversary::ProjectorMode::Measured
                          : name == "projector-oracle" ? adversary::ProjectorMode::Oracle
                                                       : adversary::ProjectorMode::Scrambled;
        if (o.code_n || !o.code_file.empty()) {
            if (!(o.theta > 0.0 && o.theta < std::numbers::pi / 2.0)) throw ConfigError("theta must lie in (0, pi/2)");
            auto code = load_code(o);
            if (!code) code = lincode::repetition_code(*o.code_n);
            rep = adversary::synthetic_projector_trials(*code, protocol::LieLabel::TypeA, o.theta, mode, o.trials,
                                                        o.seed);
        } else {
            rep = adversary::projector_attack_trials(make_params(o), mode, o.trials);
        }
    } else if (name == "typeb-flood") {
        rep = adversary::flood_attack_trials(make_params(o), o.trials);
    } else if (name == "measure-early") {
        rep = adversary::alice_measure_early_attack(make_params(o), o.trials);
    } else if (name == "bitflip") {
        if (flip != "1to0" && flip != "0to1") throw ConfigError("--flip must be 1to0 or 0to1");
        rep = bitflip_trials(make_params(o), o.trials, flip == "1to0");
    } else {
        throw ConfigError("unknown attack '" + name +
                          "'; expected projector, projector-oracle, projector-scrambled, typeb-flood, "
                          "measure-early or bitflip");
    }
    std::ostringstream text;
    text << rep.attack_name << ": trials=" << rep.trials << " success=" << rep.success_count
         << " detected=" << rep.detection_count << " advantage=" << rep.advantage;
    if (!rep.notes.empty()) text << " (" << rep.notes << ")";
    text << '\n';
    emit(o, adversary::to_json(rep), text.str());
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Entanglement-based bit commitment simulator"};
    app.require_subcommand(1);
    Options o;
    std::string transcript_path;
    std::size_t transcript_index = 0;
    std::string attack_name;
    std::string flip = "1to0";

    auto *run = app.add_subcommand("run", "run honest commit and unveil trials");
    auto *stats = app.add_subcommand("stats", "exact per-lie-type detection probabilities");
    auto *window = app.add_subcommand("window", "the admissible range of the code distance");
    auto *analyze = app.add_subcommand("analyze", "orthogonality certificate for a transcript");
    auto *attack = app.add_subcommand("attack", "run a named attack");
    for (auto *cmd : {run, stats, window, analyze, attack}) add_params(cmd, o);
    analyze->add_option("transcript", transcript_path, "transcript JSON file")->required();
    analyze->add_option("--index", transcript_index, "entry to analyze when the file holds several");
    attack->add_option("name", attack_name, "attack name")->required();
    attack->add_option("--flip", flip, "bitflip direction: 1to0 or 0to1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*run) return cmd_run(o);
        if (*stats) return cmd_stats(o);
        if (*window) return cmd_window(o);
        if (*analyze) return cmd_analyze(o, transcript_path, transcript_index);
        if (*attack) return cmd_attack(o, attack_name, flip);
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const error &e) {
        std::cerr << "error: " << e.what() << '\n';
        const bool config = e.code() == errc::invalid_params || e.code() == errc::theta_out_of_range ||
                            e.code() == errc::infeasible_lie_counts || e.code() == errc::construction_failed;
        return config ? 2 : 1;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
