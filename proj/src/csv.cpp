#include "chronos/csv.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

namespace chronos {

namespace {

bool is_gz(const std::string& path) {
    return path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
}

void write_file(const std::string& path, const std::string& text) {
    if (is_gz(path)) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw IoError("cannot open for writing: " + path);
        const int written = gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
        gzclose(f);
        if (written != static_cast<int>(text.size())) throw IoError("write failed: " + path);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << text;
    if (!f) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    if (is_gz(path)) {
        gzFile f = gzopen(path.c_str(), "rb");
        if (!f) throw IoError("cannot open: " + path);
        std::string out;
        char buf[1 << 16];
        int got;
        while ((got = gzread(f, buf, sizeof buf)) > 0) out.append(buf, got);
        gzclose(f);
        if (got < 0) throw IoError("read failed: " + path);
        return out;
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void append_num(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

const char* kind_name(AvarKind kind) {
    switch (kind) {
        case AvarKind::analytical_free: return "analytical_free";
        case AvarKind::analytical_mean: return "analytical_mean";
        case AvarKind::statistical: return "statistical";
    }
    return "statistical";
}

} // namespace

std::string trace_to_csv(const SimTrace& trace) {
    std::string out = "k,entity,x1_s,x2,u\n";
    out.reserve(static_cast<size_t>(trace.horizon + 1) * (trace.n + trace.g + 1) * 48);
    for (long k = 0; k <= trace.horizon; ++k) {
        const std::string kpfx = std::to_string(k);
        for (int i = 0; i < trace.n; ++i) {
            out += kpfx;
            out += ",mac";
            out += std::to_string(i + 1);
            out += ',';
            append_num(out, trace.mac_x1(k, i));
            out += ',';
            append_num(out, trace.mac_x2(k, i));
            out += ',';
            if (k < trace.horizon) append_num(out, trace.u(k, i));
            out += '\n';
        }
        for (int j = 0; j < trace.g; ++j) {
            out += kpfx;
            out += ",gac";
            out += std::to_string(j + 1);
            out += ',';
            append_num(out, trace.gac_x1(k, j));
            out += ',';
            append_num(out, trace.gac_x2(k, j));
            out += ",\n";
        }
        if (trace.has_sup) {
            out += kpfx;
            out += ",sup,";
            append_num(out, trace.zhat(k, 0));
            out += ',';
            append_num(out, trace.zhat(k, 1));
            out += ",\n";
        }
    }
    return out;
}

SimTrace trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split(line, ',')[0] != "k")
        throw ValidationError("trace csv: missing header");

    struct Row {
        long k;
        double x1, x2, u;
        bool has_u;
    };
    std::map<std::string, std::vector<Row>> by_entity;
    long max_k = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw ValidationError("trace csv: bad row: " + line);
        Row r{};
        r.k = std::stol(f[0]);
        r.x1 = std::stod(f[2]);
        r.x2 = std::stod(f[3]);
        r.has_u = !f[4].empty();
        r.u = r.has_u ? std::stod(f[4]) : 0.0;
        by_entity[f[1]].push_back(r);
        max_k = std::max(max_k, r.k);
    }
    if (max_k < 0) throw ValidationError("trace csv: no rows");

    SimTrace tr;
    tr.horizon = max_k;
    int n = 0, g = 0;
    for (const auto& [name, rows] : by_entity) {
        (void)rows;
        if (name.rfind("mac", 0) == 0) n = std::max(n, std::stoi(name.substr(3)));
        else if (name.rfind("gac", 0) == 0) g = std::max(g, std::stoi(name.substr(3)));
        else if (name == "sup") tr.has_sup = true;
        else throw ValidationError("trace csv: unknown entity " + name);
    }
    tr.n = n;
    tr.g = g;
    tr.mac_x1.setZero(max_k + 1, n);
    tr.mac_x2.setZero(max_k + 1, n);
    tr.gac_x1.setZero(max_k + 1, g);
    tr.gac_x2.setZero(max_k + 1, g);
    tr.u.setZero(max_k, n);
    tr.ztilde.setZero(max_k + 1, 2);
    tr.zhat.setZero(max_k + 1, 2);

    for (const auto& [name, rows] : by_entity) {
        if (static_cast<long>(rows.size()) != max_k + 1)
            throw ValidationError("trace csv: entity " + name + " has missing steps");
        for (const auto& r : rows) {
            if (name == "sup") {
                tr.zhat(r.k, 0) = r.x1;
                tr.zhat(r.k, 1) = r.x2;
            } else if (name.rfind("mac", 0) == 0) {
                const int i = std::stoi(name.substr(3)) - 1;
                tr.mac_x1(r.k, i) = r.x1;
                tr.mac_x2(r.k, i) = r.x2;
                if (r.has_u && r.k < max_k) tr.u(r.k, i) = r.u;
            } else {
                const int j = std::stoi(name.substr(3)) - 1;
                tr.gac_x1(r.k, j) = r.x1;
                tr.gac_x2(r.k, j) = r.x2;
            }
        }
    }
    for (long k = 0; k <= max_k; ++k) {
        tr.ztilde(k, 0) = tr.mac_x1.row(k).mean() - (g > 0 ? tr.gac_x1.row(k).mean() : 0.0);
        tr.ztilde(k, 1) = tr.mac_x2.row(k).mean() - (g > 0 ? tr.gac_x2.row(k).mean() : 0.0);
    }
    return tr;
}

void write_trace_csv(const SimTrace& trace, const std::string& path) {
    write_file(path, trace_to_csv(trace));
}

SimTrace read_trace_csv(const std::string& path) { return trace_from_csv(read_file(path)); }

std::string avar_to_csv(const std::vector<AvarCurve>& curves) {
    std::string out = "tau_s,avar,entity,kind\n";
    for (const auto& c : curves)
        for (const auto& p : c.points) {
            append_num(out, p.tau);
            out += ',';
            append_num(out, p.avar);
            out += ',';
            out += c.entity;
            out += ',';
            out += kind_name(c.kind);
            out += '\n';
        }
    return out;
}

void write_avar_csv(const std::vector<AvarCurve>& curves, const std::string& path) {
    write_file(path, avar_to_csv(curves));
}

} // namespace chronos
