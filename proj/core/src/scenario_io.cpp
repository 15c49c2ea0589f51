// SPDX-License-Identifier: Apache-2.0
//
// irslens - IRS-enhanced mmWave lens-array downlink simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0

#include "irslens/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace irslens {

using nlohmann::json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

Scenario paper_profile()
{
    return Scenario{}; // struct defaults mirror the reference configuration
}

Scenario desk_profile()
{
    Scenario s;
    s.m_antennas = 31;
    s.n_elements = 16;
    s.l_irs = 2;
    s.k_users = 4;
    s.n_rf = 8;
    s.phase_bits = 4;
    s.gp_paths = 2;
    s.p_n_w = 0.0045; // no published draw for 4-bit elements; fixed profile constant
    return s;
}

bool pn_lookup_w(arma::uword bits, double& out_w)
{
    switch (bits)
    {
        case 5: out_w = 0.006; return true;
        case 6: out_w = 0.0078; return true;
        default: return false;
    }
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw config_error("scenario config: " + path + ": " + what);
}

void expect_keys(const json& obj, const std::string& path,
                 const std::set<std::string>& allowed)
{
    for (const auto& item : obj.items())
        if (allowed.find(item.key()) == allowed.end())
            fail(path.empty() ? item.key() : path + "." + item.key(), "unknown field");
}

double get_number(const json& obj, const std::string& path, const std::string& key)
{
    const json& v = obj.at(key);
    if (!v.is_number())
        fail(path + key, "expected a number");
    return v.get<double>();
}

arma::uword get_count(const json& obj, const std::string& path, const std::string& key)
{
    const json& v = obj.at(key);
    if (!v.is_number_unsigned())
        fail(path + key, "expected a nonnegative integer");
    return v.get<arma::uword>();
}

std::array<double, 2> get_point(const json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(path, "expected [x, y] coordinates in meters");
    return {v[0].get<double>(), v[1].get<double>()};
}

PathlossParams parse_pathloss(const json& obj, const std::string& path, PathlossParams base)
{
    expect_keys(obj, path, {"kappa_a_db", "kappa_b", "sigma_c_db", "tx_gain_dbi", "rx_gain_dbi"});
    if (obj.contains("kappa_a_db"))
        base.kappa_a_db = get_number(obj, path + ".", "kappa_a_db");
    if (obj.contains("kappa_b"))
        base.kappa_b = get_number(obj, path + ".", "kappa_b");
    if (obj.contains("sigma_c_db"))
        base.sigma_c_db = get_number(obj, path + ".", "sigma_c_db");
    if (obj.contains("tx_gain_dbi"))
        base.tx_gain_dbi = get_number(obj, path + ".", "tx_gain_dbi");
    if (obj.contains("rx_gain_dbi"))
        base.rx_gain_dbi = get_number(obj, path + ".", "rx_gain_dbi");
    return base;
}

} // namespace

Scenario scenario_from_json(const std::string& json_text, const Scenario& base)
{
    json doc;
    try
    {
        doc = json::parse(json_text);
    }
    catch (const json::parse_error& err)
    {
        throw config_error(std::string("scenario config: ") + err.what());
    }
    if (!doc.is_object())
        throw config_error("scenario config: top level must be a JSON object");

    expect_keys(doc, "",
                {"m_antennas", "n_elements", "l_irs", "k_users", "n_rf", "phase_bits",
                 "gp_paths", "p_t_dbm", "p_t_w", "sigma2_dbm", "sigma2_w", "rho_db", "rho",
                 "epsilon", "p_rf_w", "p_n_w", "p_cir_w", "bandwidth_hz", "lens_aperture",
                 "lens_norm_dim", "geometry", "pathloss_los", "pathloss_nlos"});

    Scenario s = base;
    bool explicit_pn = false;

    if (doc.contains("m_antennas"))
        s.m_antennas = get_count(doc, "", "m_antennas");
    if (doc.contains("n_elements"))
        s.n_elements = get_count(doc, "", "n_elements");
    if (doc.contains("l_irs"))
        s.l_irs = get_count(doc, "", "l_irs");
    if (doc.contains("k_users"))
        s.k_users = get_count(doc, "", "k_users");
    if (doc.contains("n_rf"))
        s.n_rf = get_count(doc, "", "n_rf");
    if (doc.contains("phase_bits"))
        s.phase_bits = get_count(doc, "", "phase_bits");
    if (doc.contains("gp_paths"))
        s.gp_paths = get_count(doc, "", "gp_paths");

    if (doc.contains("p_t_dbm") && doc.contains("p_t_w"))
        fail("p_t_dbm", "conflicts with p_t_w; give one of them");
    if (doc.contains("p_t_dbm"))
        s.p_t_w = dbm_to_watts(get_number(doc, "", "p_t_dbm"));
    if (doc.contains("p_t_w"))
        s.p_t_w = get_number(doc, "", "p_t_w");

    if (doc.contains("sigma2_dbm") && doc.contains("sigma2_w"))
        fail("sigma2_dbm", "conflicts with sigma2_w; give one of them");
    if (doc.contains("sigma2_dbm"))
        s.sigma2_w = dbm_to_watts(get_number(doc, "", "sigma2_dbm"));
    if (doc.contains("sigma2_w"))
        s.sigma2_w = get_number(doc, "", "sigma2_w");

    if (doc.contains("rho_db") && doc.contains("rho"))
        fail("rho_db", "conflicts with rho; give one of them");
    auto parse_rho = [&](const std::string& key, bool in_db) {
        const json& v = doc.at(key);
        std::vector<double> out;
        if (v.is_number())
            out.push_back(v.get<double>());
        else if (v.is_array())
        {
            for (const auto& e : v)
            {
                if (!e.is_number())
                    fail(key, "expected a number or an array of numbers");
                out.push_back(e.get<double>());
            }
        }
        else
            fail(key, "expected a number or an array of numbers");
        if (in_db)
            for (double& r : out)
                r = db_to_linear(r);
        s.rho = std::move(out);
    };
    if (doc.contains("rho_db"))
        parse_rho("rho_db", true);
    if (doc.contains("rho"))
        parse_rho("rho", false);

    if (doc.contains("epsilon"))
        s.epsilon = get_number(doc, "", "epsilon");
    if (doc.contains("p_rf_w"))
        s.p_rf_w = get_number(doc, "", "p_rf_w");
    if (doc.contains("p_n_w"))
    {
        s.p_n_w = get_number(doc, "", "p_n_w");
        explicit_pn = true;
    }
    if (doc.contains("p_cir_w"))
        s.p_cir_w = get_number(doc, "", "p_cir_w");
    if (doc.contains("bandwidth_hz"))
        s.bandwidth_hz = get_number(doc, "", "bandwidth_hz");
    if (doc.contains("lens_aperture"))
        s.lens_aperture = get_number(doc, "", "lens_aperture");
    if (doc.contains("lens_norm_dim"))
        s.lens_norm_dim = get_number(doc, "", "lens_norm_dim");

    if (doc.contains("geometry"))
    {
        const json& g = doc["geometry"];
        if (!g.is_object())
            fail("geometry", "expected an object");
        expect_keys(g, "geometry",
                    {"bs_position", "irs_positions", "user_positions", "user_disk_center",
                     "user_disk_radius"});
        if (g.contains("bs_position"))
            s.geometry.bs_position = get_point(g["bs_position"], "geometry.bs_position");
        if (g.contains("irs_positions"))
        {
            if (!g["irs_positions"].is_array())
                fail("geometry.irs_positions", "expected an array of [x, y] points");
            s.geometry.irs_positions.clear();
            for (std::size_t i = 0; i < g["irs_positions"].size(); ++i)
                s.geometry.irs_positions.push_back(get_point(
                    g["irs_positions"][i], "geometry.irs_positions[" + std::to_string(i) + "]"));
        }
        if (g.contains("user_positions"))
        {
            if (!g["user_positions"].is_array())
                fail("geometry.user_positions", "expected an array of [x, y] points");
            s.geometry.user_positions.clear();
            for (std::size_t i = 0; i < g["user_positions"].size(); ++i)
                s.geometry.user_positions.push_back(get_point(
                    g["user_positions"][i], "geometry.user_positions[" + std::to_string(i) + "]"));
        }
        if (g.contains("user_disk_center"))
            s.geometry.user_disk_center =
                get_point(g["user_disk_center"], "geometry.user_disk_center");
        if (g.contains("user_disk_radius"))
            s.geometry.user_disk_radius = get_number(g, "geometry.", "user_disk_radius");
    }

    if (doc.contains("pathloss_los"))
        s.pathloss_los = parse_pathloss(doc["pathloss_los"], "pathloss_los", s.pathloss_los);
    if (doc.contains("pathloss_nlos"))
        s.pathloss_nlos = parse_pathloss(doc["pathloss_nlos"], "pathloss_nlos", s.pathloss_nlos);

    // Phase resolution changed without an explicit element power: use the
    // published draw when the resolution is known, otherwise demand a value.
    if (doc.contains("phase_bits") && !explicit_pn)
    {
        double pn = 0.0;
        if (pn_lookup_w(s.phase_bits, pn))
            s.p_n_w = pn;
        else
            fail("phase_bits", "no default element power for this resolution; set p_n_w");
    }

    try
    {
        s.validate();
    }
    catch (const std::invalid_argument& err)
    {
        throw config_error(std::string("scenario config: ") + err.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path, const Scenario& base)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("scenario config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str(), base);
}

Scenario load_scenario(const std::string& path) { return load_scenario(path, paper_profile()); }

std::string scenario_to_json(const Scenario& s)
{
    json doc;
    doc["m_antennas"] = s.m_antennas;
    doc["n_elements"] = s.n_elements;
    doc["l_irs"] = s.l_irs;
    doc["k_users"] = s.k_users;
    doc["n_rf"] = s.n_rf;
    doc["phase_bits"] = s.phase_bits;
    doc["gp_paths"] = s.gp_paths;
    doc["p_t_w"] = s.p_t_w;
    doc["sigma2_w"] = s.sigma2_w;
    doc["rho"] = s.rho;
    doc["epsilon"] = s.epsilon;
    doc["p_rf_w"] = s.p_rf_w;
    doc["p_n_w"] = s.p_n_w;
    doc["p_cir_w"] = s.p_cir_w;
    doc["bandwidth_hz"] = s.bandwidth_hz;
    doc["lens_aperture"] = s.lens_aperture_eff();
    doc["lens_norm_dim"] = s.lens_norm_dim_eff();
    doc["geometry"]["bs_position"] = s.geometry.bs_position;
    doc["geometry"]["irs_positions"] = s.geometry.irs_positions;
    if (!s.geometry.user_positions.empty())
        doc["geometry"]["user_positions"] = s.geometry.user_positions;
    doc["geometry"]["user_disk_center"] = s.geometry.user_disk_center;
    doc["geometry"]["user_disk_radius"] = s.geometry.user_disk_radius;
    auto dump_pl = [](const PathlossParams& p) {
        json o;
        o["kappa_a_db"] = p.kappa_a_db;
        o["kappa_b"] = p.kappa_b;
        o["sigma_c_db"] = p.sigma_c_db;
        o["tx_gain_dbi"] = p.tx_gain_dbi;
        o["rx_gain_dbi"] = p.rx_gain_dbi;
        return o;
    };
    doc["pathloss_los"] = dump_pl(s.pathloss_los);
    doc["pathloss_nlos"] = dump_pl(s.pathloss_nlos);
    return doc.dump(2);
}

} // namespace irslens
