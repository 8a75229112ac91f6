#include "phasesim/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "snapshot payload layout assumes a little-endian host");

namespace phasesim::snapshot {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void abort_marker(const std::filesystem::path& dir, const std::string& why) {
    std::ofstream m(dir / "ABORTED");
    m << why << "\n";
}

} // namespace

std::string meta_filename(std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06zu.meta", step);
    return buf;
}

std::string payload_filename(std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06zu.bin", step);
    return buf;
}

void write(const std::filesystem::path& dir, Header h, const Field& f) {
    h.hbar = f.grid.hbar();
    h.axes.clear();
    for (std::size_t a = 0; a < f.grid.rank(); ++a) {
        const Axis& ax = f.grid.axes()[a];
        h.axes.push_back({to_string(ax.label), ax.n, ax.min, ax.max,
                          f.reps[a] == Rep::direct ? "direct" : "conjugate"});
    }
    h.payload_file = payload_filename(h.step);
    h.payload_bytes = f.data.size() * 16;

    const auto payload_path = dir / h.payload_file;
    {
        std::ofstream out(payload_path, std::ios::binary);
        if (!out) {
            abort_marker(dir, "cannot open payload " + payload_path.string());
            throw IoError("cannot open snapshot payload " + payload_path.string());
        }
        out.write(reinterpret_cast<const char*>(f.data.data()),
                  static_cast<std::streamsize>(h.payload_bytes));
        out.flush();
        if (!out) {
            abort_marker(dir, "short write on " + payload_path.string());
            throw IoError("snapshot payload write failed (disk full?): " +
                          payload_path.string());
        }
    }

    const auto meta_path = dir / meta_filename(h.step);
    std::ostringstream os;
    os << "# phasesim snapshot\n[snapshot]\n";
    os << "schema = " << h.schema << "\n";
    os << "run_id = " << h.run_id << "\n";
    os << "mode = " << h.mode << "\n";
    os << "step = " << h.step << "\n";
    os << "time = " << fmt_double(h.time) << "\n";
    os << "hbar = " << fmt_double(h.hbar) << "\n";
    os << "splitting = " << h.splitting << "\n";
    os << "payload = " << h.payload_file << "\n";
    os << "payload_bytes = " << h.payload_bytes << "\n";
    os << "[axes]\n";
    for (const auto& a : h.axes)
        os << "axis = " << a.label << " " << a.n << " " << fmt_double(a.min) << " "
           << fmt_double(a.max) << " " << a.rep << "\n";
    os << "[model]\n";
    os << "T = \"" << h.T_text << "\"\n";
    os << "U = \"" << h.U_text << "\"\n";
    for (const auto& kv : h.params)
        os << "param = " << kv.first << " " << fmt_double(kv.second) << "\n";
    os << "[summary]\n";
    for (const auto& kv : h.summary)
        os << kv.first << " = " << fmt_double(kv.second) << "\n";

    std::ofstream meta(meta_path);
    if (!meta) {
        abort_marker(dir, "cannot open meta " + meta_path.string());
        throw IoError("cannot open snapshot metadata " + meta_path.string());
    }
    meta << os.str();
    meta.flush();
    if (!meta) {
        abort_marker(dir, "short write on " + meta_path.string());
        throw IoError("snapshot metadata write failed: " + meta_path.string());
    }
}

namespace {

struct Line {
    std::string key, value;
};

bool split_kv(const std::string& line, Line& out) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) return false;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    out.key = trim(line.substr(0, eq));
    out.value = trim(line.substr(eq + 1));
    return true;
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

} // namespace

Record read(const std::filesystem::path& meta_path) {
    std::ifstream in(meta_path);
    if (!in) throw IoError("cannot open " + meta_path.string());

    Record rec;
    Header& h = rec.header;
    h.schema.clear();
    std::string section, line;
    std::vector<Rep> reps;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto b = line.find_first_not_of(" \t");
        if (line[b] == '[') {
            const auto e = line.find(']');
            if (e == std::string::npos) throw IoError("bad section in " + meta_path.string());
            section = line.substr(b + 1, e - b - 1);
            continue;
        }
        Line kv;
        if (!split_kv(line, kv)) throw IoError("bad line in " + meta_path.string());
        if (section == "snapshot") {
            if (kv.key == "schema") h.schema = kv.value;
            else if (kv.key == "run_id") h.run_id = kv.value;
            else if (kv.key == "mode") h.mode = kv.value;
            else if (kv.key == "step") h.step = std::stoull(kv.value);
            else if (kv.key == "time") h.time = std::stod(kv.value);
            else if (kv.key == "hbar") h.hbar = std::stod(kv.value);
            else if (kv.key == "splitting") h.splitting = kv.value;
            else if (kv.key == "payload") h.payload_file = kv.value;
            else if (kv.key == "payload_bytes") h.payload_bytes = std::stoull(kv.value);
        } else if (section == "axes") {
            if (kv.key == "axis") {
                std::istringstream as(kv.value);
                Header::AxisEntry a;
                if (!(as >> a.label >> a.n >> a.min >> a.max >> a.rep))
                    throw IoError("bad axis entry in " + meta_path.string());
                h.axes.push_back(a);
                reps.push_back(a.rep == "conjugate" ? Rep::conjugate : Rep::direct);
            }
        } else if (section == "model") {
            if (kv.key == "T") h.T_text = unquote(kv.value);
            else if (kv.key == "U") h.U_text = unquote(kv.value);
            else if (kv.key == "param") {
                std::istringstream ps(kv.value);
                std::string name;
                double v;
                if (!(ps >> name >> v)) throw IoError("bad param in " + meta_path.string());
                h.params[name] = v;
            }
        } else if (section == "summary") {
            h.summary[kv.key] = std::stod(kv.value);
        }
    }

    if (h.schema.empty()) throw IoError("missing schema in " + meta_path.string());
    const auto dot = h.schema.find('.');
    const std::string major = dot == std::string::npos ? h.schema : h.schema.substr(0, dot);
    if (major != "1")
        throw IoError("unsupported snapshot schema " + h.schema + " (reader handles 1.x)");
    if (h.axes.empty()) throw IoError("no axes in " + meta_path.string());

    std::vector<AxisSpec> specs;
    for (const auto& a : h.axes)
        specs.push_back({axis_label_from(a.label), a.n, a.min, a.max});
    rec.field.grid = make_grid(specs, h.hbar);
    rec.field.reps = reps;

    const auto payload_path = meta_path.parent_path() / h.payload_file;
    std::ifstream pin(payload_path, std::ios::binary);
    if (!pin) throw IoError("cannot open payload " + payload_path.string());
    const std::size_t want = rec.field.grid.size();
    if (h.payload_bytes != want * 16)
        throw IoError("payload size does not match axis specs in " + meta_path.string());
    rec.field.data.resize(want);
    pin.read(reinterpret_cast<char*>(rec.field.data.data()),
             static_cast<std::streamsize>(want * 16));
    if (pin.gcount() != static_cast<std::streamsize>(want * 16))
        throw IoError("payload truncated: " + payload_path.string());
    return rec;
}

} // namespace phasesim::snapshot
