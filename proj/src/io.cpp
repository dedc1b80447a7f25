#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tiltrotor/cli_io.hpp"

namespace tiltrotor {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<TraceColumn>& trace_columns() {
    static const std::vector<TraceColumn> cols = {
        {"time_s", [](const TraceRow& r) { return r.state.time_s; }},
        {"x_m", [](const TraceRow& r) { return r.state.x_m; }},
        {"altitude_m", [](const TraceRow& r) { return r.state.altitude_m(); }},
        {"vx_ms", [](const TraceRow& r) { return r.state.vx_ms; }},
        {"vz_ms", [](const TraceRow& r) { return r.state.vz_ms; }},
        {"pitch_deg", [](const TraceRow& r) { return rad2deg(r.state.pitch_rad); }},
        {"pitch_rate_deg_s", [](const TraceRow& r) { return rad2deg(r.state.pitch_rate_rad_s); }},
        {"tilt_deg", [](const TraceRow& r) { return rad2deg(r.state.tilt_rad); }},
        {"tilt_rate_deg_s", [](const TraceRow& r) { return rad2deg(r.state.tilt_rate_rad_s); }},
        {"int_e_z", [](const TraceRow& r) { return r.state.int_e_z; }},
        {"int_e_x", [](const TraceRow& r) { return r.state.int_e_x; }},
        {"int_e_theta", [](const TraceRow& r) { return r.state.int_e_theta; }},
        {"f1_N", [](const TraceRow& r) { return r.f1_N; }},
        {"f2_N", [](const TraceRow& r) { return r.f2_N; }},
        {"tilt_rate_cmd_deg_s", [](const TraceRow& r) { return rad2deg(r.tilt_rate_cmd_rad_s); }},
        {"tilt_accel_deg_s2", [](const TraceRow& r) { return rad2deg(r.tilt_accel_rad_s2); }},
        {"tilt_desired_deg", [](const TraceRow& r) { return rad2deg(r.tilt_desired_rad); }},
        {"v_desired_ms", [](const TraceRow& r) { return r.v_desired_ms; }},
        {"blend_w", [](const TraceRow& r) { return r.blend_w; }},
        {"flags", [](const TraceRow& r) { return static_cast<double>(r.flags); }},
        {"authority_exhausted", [](const TraceRow& r) { return r.authority_exhausted ? 1.0 : 0.0; }},
        {"fx_N", [](const TraceRow& r) { return r.forces.fx_N; }},
        {"fz_N", [](const TraceRow& r) { return r.forces.fz_N; }},
        {"m_pitch_Nm", [](const TraceRow& r) { return r.forces.m_pitch_Nm; }},
        {"kp_z", [](const TraceRow& r) { return r.gains.altitude.kp; }},
        {"ki_z", [](const TraceRow& r) { return r.gains.altitude.ki; }},
        {"kd_z", [](const TraceRow& r) { return r.gains.altitude.kd; }},
        {"kp_x", [](const TraceRow& r) { return r.gains.velocity.kp; }},
        {"ki_x", [](const TraceRow& r) { return r.gains.velocity.ki; }},
        {"kd_x", [](const TraceRow& r) { return r.gains.velocity.kd; }},
        {"kp_theta", [](const TraceRow& r) { return r.gains.pitch.kp; }},
        {"ki_theta", [](const TraceRow& r) { return r.gains.pitch.ki; }},
        {"kd_theta", [](const TraceRow& r) { return r.gains.pitch.kd; }},
        {"in_corridor", [](const TraceRow& r) { return r.in_corridor ? 1.0 : 0.0; }},
    };
    return cols;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
    const auto& cols = trace_columns();
    std::string s;
    s.reserve(trace.rows.size() * cols.size() * 20 + 1024);
    s += kTraceFormat;
    s += "\r\n";
    s += cols[0].name + ",mode";
    for (std::size_t i = 1; i < cols.size(); ++i) s += "," + cols[i].name;
    s += "\r\n";
    for (const auto& row : trace.rows) {
        s += format_double(cols[0].value(row));
        s += ",";
        s += to_string(row.mode);
        for (std::size_t i = 1; i < cols.size(); ++i) {
            s += ",";
            s += format_double(cols[i].value(row));
        }
        s += "\r\n";
    }
    write_file_atomic(path, s);
}

void write_corridor_csv(const std::string& path, const Corridor& c) {
    std::string s = "v_ms,lower_tilt_deg,upper_tilt_deg,schedule_tilt_deg,raw_lower_tilt_deg,"
                    "raw_upper_tilt_deg,feasible_cells\r\n";
    const std::size_t nt = c.tilt_grid_rad.size();
    for (std::size_t i = 0; i < c.velocity_grid_ms.size(); ++i) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < nt; ++j) count += c.is_feasible(i, j) ? 1 : 0;
        s += format_double(c.velocity_grid_ms[i]) + "," + format_double(rad2deg(c.lower_rad[i])) +
             "," + format_double(rad2deg(c.upper_rad[i])) + "," +
             format_double(rad2deg(c.schedule_rad[i])) + "," +
             format_double(rad2deg(c.raw_lower_rad[i])) + "," +
             format_double(rad2deg(c.raw_upper_rad[i])) + "," + std::to_string(count) + "\r\n";
    }
    write_file_atomic(path, s);
}

void write_summary(const std::string& path, const SimTrace& trace, const MetricReport& m) {
    using nlohmann::ordered_json;
    auto opt = [](const std::optional<double>& v) -> ordered_json {
        return v ? ordered_json(*v) : ordered_json(nullptr);
    };
    ordered_json j;
    j["format"] = "tiltrotor-summary v1";
    j["scenario"] = trace.scenario.name;
    j["kind"] = to_string(trace.scenario.kind);
    j["initial_mode"] = to_string(trace.scenario.initial_mode);
    j["failed"] = m.failed;
    j["failure"] = m.failure;
    j["steps"] = trace.rows.size();
    j["dt_s"] = trace.scenario.dt_s;
    j["trim_speed_ms"] = trace.trim_speed_ms;
    j["trigger_time_s"] = opt(trace.trigger_s);
    j["tilt85_time_s"] = opt(m.tilt85_time_s);
    j["tilt5_time_s"] = opt(m.tilt5_time_s);
    j["transition_duration_s"] = opt(m.transition_duration_s);
    j["max_altitude_deviation_m"] = m.max_altitude_deviation_m;
    j["max_pitch_deviation_deg"] = m.max_pitch_deviation_deg;
    j["peak_f1_N"] = m.peak_f1_N;
    j["peak_f2_N"] = m.peak_f2_N;
    j["engine_saturation_s"] = m.engine_saturation_s;
    j["longest_authority_loss_s"] = m.longest_authority_loss_s;
    j["corridor_violations"] = m.corridor_violations;
    j["mode_switches"] = m.switches.size();
    j["max_thrust_discontinuity_N"] = m.max_thrust_discontinuity_N;
    j["final_speed_ms"] = m.final_speed_ms;
    j["final_normalized_speed"] =
        m.normalized_speed.empty() ? ordered_json(nullptr) : ordered_json(m.normalized_speed.back());
    j["final_altitude_m"] = m.final_altitude_m;
    j["final_pitch_deg"] = m.final_pitch_deg;
    if (m.step) {
        j["step_initial"] = m.step->initial;
        j["step_target"] = m.step->target;
        j["step_overshoot"] = m.step->overshoot;
        j["step_settling_time_s"] = opt(m.step->settling_time_s);
        j["step_final_value"] = m.step->final_value;
    }
    for (std::size_t i = 0; i < m.switches.size(); ++i) {
        const auto& sw = m.switches[i];
        const std::string k = "switch" + std::to_string(i + 1);
        j[k + "_time_s"] = sw.time_s;
        j[k + "_to"] = to_string(sw.to);
        j[k + "_thrust_jump_N"] = sw.thrust_jump_N;
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw std::out_of_range("no CSV column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    CsvTable t;
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, at_line_start = true, comment = false, header_done = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (at_line_start && !header_done && c == '#') comment = true;
        at_line_start = false;
        if (comment) {
            if (c == '\n') {
                comment = false;
                at_line_start = true;
            }
            continue;
        }
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') quoted = true;
        else if (c == ',') {
            rec.push_back(field);
            field.clear();
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            rec.push_back(field);
            field.clear();
            records.push_back(std::move(rec));
            rec.clear();
            at_line_start = true;
            header_done = true;
        } else {
            field += c;
        }
    }
    if (!field.empty() || !rec.empty()) {
        rec.push_back(field);
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw std::runtime_error("'" + path + "' has no header row");
    t.header = std::move(records.front());
    t.rows.assign(std::make_move_iterator(records.begin() + 1),
                  std::make_move_iterator(records.end()));
    return t;
}

}  // namespace tiltrotor
