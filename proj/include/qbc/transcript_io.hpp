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

/**
 * @file transcript_io.hpp
 * JSON interchange format for transcripts. Keys are emitted in a fixed
 * canonical order (params, sites, sets, strings, b, verdicts, then the
 * aborted_at / code extensions) and all index lists are ascending, so equal
 * transcripts serialize to identical bytes.
 */
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbc/error.hpp"
#include "qbc/protocol.hpp"

namespace qbc::io {

using json = nlohmann::ordered_json;

inline json to_json(const protocol::Params &p) {
    json j;
    j["s"] = p.s;
    if (p.theta.size() == 1) {
        j["theta"] = p.theta[0];
    } else {
        j["theta"] = p.theta;
    }
    j["f_a"] = p.f_a;
    j["f_b"] = p.f_b;
    j["f_c"] = p.f_c;
    j["s_prime"] = p.s_prime;
    json code;
    code["kind"] = p.code.kind == protocol::CodeKind::Block ? "block" : "random";
    code["k"] = p.code.k;
    code["d"] = p.code.d ? json(*p.code.d) : json(nullptr);
    j["code_spec"] = code;
    j["seed"] = p.seed;
    j["check_z"] = p.check_z;
    return j;
}

inline json to_json(const lincode::LinearCode &code) {
    json j;
    j["n"] = code.n();
    j["k"] = code.k();
    j["d"] = code.d();
    json rows = json::array();
    for (const auto &r : code.generator()) rows.push_back(r.to_string());
    j["generator"] = rows;
    return j;
}

inline json to_json(const protocol::Transcript &t) {
    json j;
    j["params"] = to_json(t.params);
    json sites = json::array();
    for (std::size_t i = 0; i < t.sites.size(); ++i) {
        const auto &s = t.sites[i];
        json site;
        site["i"] = i;
        site["theta"] = s.theta;
        site["q"] = s.q;
        site["membership"] = s.deferred ? "S'" : "S''";
        site["actual"] = s.actual ? json{{"p", s.actual->basis}, {"q", s.actual->value}} : json(nullptr);
        site["fake"] = json{{"p", s.fake.basis}, {"q", s.fake.value}};
        site["lie_label"] = std::string(protocol::to_string(s.label));
        site["alice_measured"] = s.alice_measured;
        site["p"] = s.p ? json(*s.p) : json(nullptr);
        sites.push_back(site);
    }
    j["sites"] = sites;
    j["sets"] = json{{"M", t.M}, {"U", t.U}, {"L", t.L}, {"La", t.La}, {"Lb", t.Lb}, {"Lc", t.Lc}, {"Sprime", t.Sprime}};
    j["strings"] = json{{"c0", t.c0.to_string()},
                        {"r", t.r.to_string()},
                        {"c", t.c.to_string()},
                        {"cprime", t.c_prime.to_string()}};
    j["b"] = t.b;
    json verdicts = json::array();
    for (const auto &v : t.verdicts) verdicts.push_back(json{{"name", v.name}, {"pass", v.pass}});
    j["verdicts"] = verdicts;
    j["aborted_at"] = t.aborted_at ? json(*t.aborted_at) : json(nullptr);
    j["code"] = t.code ? to_json(*t.code) : json(nullptr);
    return j;
}

inline protocol::Params params_from_json(const json &j) {
    protocol::Params p;
    p.s = j.at("s").get<std::size_t>();
    if (j.at("theta").is_array()) {
        p.theta = j.at("theta").get<std::vector<double>>();
    } else {
        p.theta = {j.at("theta").get<double>()};
    }
    p.f_a = j.at("f_a").get<double>();
    p.f_b = j.at("f_b").get<double>();
    p.f_c = j.at("f_c").get<double>();
    p.s_prime = j.at("s_prime").get<std::size_t>();
    if (j.contains("code_spec") && !j.at("code_spec").is_null()) {
        const auto &c = j.at("code_spec");
        p.code.kind = c.at("kind").get<std::string>() == "random" ? protocol::CodeKind::Random
                                                                   : protocol::CodeKind::Block;
        p.code.k = c.at("k").get<std::size_t>();
        if (!c.at("d").is_null()) p.code.d = c.at("d").get<std::size_t>();
    }
    p.seed = j.at("seed").get<std::uint64_t>();
    p.check_z = j.at("check_z").get<double>();
    return p;
}

inline lincode::LinearCode code_from_json(const json &j) {
    std::vector<lincode::BitString> rows;
    for (const auto &r : j.at("generator")) rows.push_back(lincode::BitString::from_string(r.get<std::string>()));
    lincode::LinearCode code(std::move(rows));
    if (code.n() != j.at("n").get<std::size_t>() || code.d() != j.at("d").get<std::size_t>()) {
        throw error(errc::parse_error, "code header disagrees with its generator");
    }
    return code;
}

inline protocol::Transcript transcript_from_json(const json &j) {
    try {
        protocol::Transcript t;
        t.params = params_from_json(j.at("params"));
        for (const auto &s : j.at("sites")) {
            protocol::SiteRecord r;
            r.theta = s.at("theta").get<double>();
            r.q = s.at("q").get<Bit>();
            r.deferred = s.at("membership").get<std::string>() == "S'";
            if (!s.at("actual").is_null()) r.actual = registers::BetaLabel{s["actual"].at("p").get<Bit>(), s["actual"].at("q").get<Bit>()};
            r.fake = {s.at("fake").at("p").get<Bit>(), s.at("fake").at("q").get<Bit>()};
            r.label = protocol::lie_label_from_string(s.at("lie_label").get<std::string>());
            r.alice_measured = s.at("alice_measured").get<bool>();
            if (!s.at("p").is_null()) r.p = s.at("p").get<Bit>();
            t.sites.push_back(r);
        }
        const auto &sets = j.at("sets");
        t.M = sets.at("M").get<std::vector<std::size_t>>();
        t.U = sets.at("U").get<std::vector<std::size_t>>();
        t.L = sets.at("L").get<std::vector<std::size_t>>();
        t.La = sets.at("La").get<std::vector<std::size_t>>();
        t.Lb = sets.at("Lb").get<std::vector<std::size_t>>();
        t.Lc = sets.at("Lc").get<std::vector<std::size_t>>();
        t.Sprime = sets.at("Sprime").get<std::vector<std::size_t>>();
        const auto &str = j.at("strings");
        t.c0 = lincode::BitString::from_string(str.at("c0").get<std::string>());
        t.r = lincode::BitString::from_string(str.at("r").get<std::string>());
        t.c = lincode::BitString::from_string(str.at("c").get<std::string>());
        t.c_prime = lincode::BitString::from_string(str.at("cprime").get<std::string>());
        t.b = j.at("b").get<Bit>();
        for (const auto &v : j.at("verdicts")) t.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>()});
        if (j.contains("aborted_at") && !j.at("aborted_at").is_null()) t.aborted_at = j.at("aborted_at").get<std::string>();
        if (j.contains("code") && !j.at("code").is_null()) t.code = code_from_json(j.at("code"));
        return t;
    } catch (const json::exception &e) {
        throw error(errc::parse_error, std::string("malformed transcript: ") + e.what());
    }
}

} // namespace qbc::io
