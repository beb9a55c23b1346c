#include "hamreg/cli/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace hamreg::cli {

using training::Dataset;
using training::Sample;

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

double parse_double(std::string_view s, int line_no) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw IoError("line " + std::to_string(line_no) + ": '" + std::string(s) + "' is not a number");
    }
    return v;
}

std::vector<std::string_view> fields(std::string_view line) {
    std::vector<std::string_view> out;
    while (true) {
        const auto pos = line.find(',');
        out.push_back(line.substr(0, pos));
        if (pos == std::string_view::npos) break;
        line.remove_prefix(pos + 1);
    }
    return out;
}

std::string join_numbers(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) s += ',';
        s += num(v(i));
    }
    return s;
}

std::vector<std::string> header_for(physics::SystemId system, models::Coords coords) {
    const int n = models::state_dim(system, coords) / 2;
    const bool cart = coords == models::Coords::Cartesian;
    std::vector<std::string> h = {"traj_id", "t"};
    for (const char* stem : {cart ? "x" : "q", cart ? "px" : "p", cart ? "xdot" : "qdot", cart ? "pxdot" : "pdot"}) {
        for (int i = 1; i <= n; ++i) h.push_back(stem + std::to_string(i));
    }
    h.emplace_back("H_hat");
    return h;
}

}  // namespace

std::string dataset_to_csv(const Dataset& ds) {
    ds.validate();
    std::ostringstream os;
    os << "# system=" << physics::to_string(ds.system) << "\n";
    os << "# coords=" << models::to_string(ds.coords) << "\n";
    os << "# split=" << training::to_string(ds.split) << "\n";
    os << "# seed=" << ds.provenance.seed << "\n";
    os << "# dt=" << num(ds.provenance.dt) << "\n";
    os << "# substeps=" << ds.provenance.substeps << "\n";
    os << "# sample_interval=" << num(ds.provenance.sample_interval) << "\n";
    os << "# duration=" << num(ds.provenance.duration) << "\n";
    os << "# sys=" << num(ds.sys.m1) << ',' << num(ds.sys.m2) << ',' << num(ds.sys.l1) << ',' << num(ds.sys.l2) << ','
       << num(ds.sys.g) << "\n";
    for (const Eigen::VectorXd& ic : ds.provenance.initial_conditions) os << "# ic=" << join_numbers(ic) << "\n";

    const auto header = header_for(ds.system, ds.coords);
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const Sample& s : ds.samples) {
        os << s.traj_id << ',' << num(s.t) << ',' << join_numbers(s.z) << ',' << join_numbers(s.zdot) << ','
           << num(s.h_hat) << "\n";
    }
    return os.str();
}

Dataset dataset_from_csv(std::string_view text) {
    Dataset ds;
    bool have_system = false, have_coords = false, have_split = false, have_header = false;
    std::size_t width = 0;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        std::string_view line = raw;
        if (line.empty()) continue;
        try {
            if (line.starts_with("#")) {
                line.remove_prefix(1);
                while (line.starts_with(" ")) line.remove_prefix(1);
                const auto eq = line.find('=');
                if (eq == std::string_view::npos) continue;
                const std::string_view key = line.substr(0, eq);
                const std::string_view value = line.substr(eq + 1);
                if (key == "system") {
                    ds.system = physics::parse_system(value);
                    have_system = true;
                } else if (key == "coords") {
                    ds.coords = models::parse_coords(value);
                    have_coords = true;
                } else if (key == "split") {
                    ds.split = training::parse_split(value);
                    have_split = true;
                } else if (key == "seed") {
                    ds.provenance.seed = std::stoull(std::string(value));
                } else if (key == "dt") {
                    ds.provenance.dt = parse_double(value, line_no);
                } else if (key == "substeps") {
                    ds.provenance.substeps = std::stoi(std::string(value));
                } else if (key == "sample_interval") {
                    ds.provenance.sample_interval = parse_double(value, line_no);
                } else if (key == "duration") {
                    ds.provenance.duration = parse_double(value, line_no);
                } else if (key == "sys") {
                    const auto f = fields(value);
                    if (f.size() != 5) throw IoError("line " + std::to_string(line_no) + ": sys needs 5 values");
                    ds.sys = {parse_double(f[0], line_no), parse_double(f[1], line_no), parse_double(f[2], line_no),
                              parse_double(f[3], line_no), parse_double(f[4], line_no)};
                } else if (key == "ic") {
                    const auto f = fields(value);
                    Eigen::VectorXd ic(static_cast<Eigen::Index>(f.size()));
                    for (std::size_t i = 0; i < f.size(); ++i) ic(static_cast<Eigen::Index>(i)) = parse_double(f[i], line_no);
                    ds.provenance.initial_conditions.push_back(std::move(ic));
                }
                continue;
            }
            if (!have_header) {
                if (!have_system || !have_coords || !have_split) {
                    throw IoError("dataset metadata (system, coords, split) must precede the header");
                }
                const auto expected = header_for(ds.system, ds.coords);
                const auto got = fields(line);
                if (got.size() != expected.size() || !std::equal(got.begin(), got.end(), expected.begin())) {
                    throw IoError("line " + std::to_string(line_no) + ": header does not match a " +
                                  physics::to_string(ds.system) + "/" + models::to_string(ds.coords) + " dataset");
                }
                width = expected.size();
                have_header = true;
                continue;
            }
            const auto f = fields(line);
            if (f.size() != width) {
                throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) + " fields, got " +
                              std::to_string(f.size()));
            }
            const auto n = static_cast<Eigen::Index>((width - 3) / 2);
            Sample s;
            s.traj_id = static_cast<int>(parse_double(f[0], line_no));
            s.t = parse_double(f[1], line_no);
            s.z.resize(n);
            s.zdot.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                s.z(i) = parse_double(f[static_cast<std::size_t>(2 + i)], line_no);
                s.zdot(i) = parse_double(f[static_cast<std::size_t>(2 + n + i)], line_no);
            }
            s.h_hat = parse_double(f.back(), line_no);
            ds.samples.push_back(std::move(s));
        } catch (const ConfigError& e) {
            throw IoError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_header) throw IoError("dataset has no header row");
    try {
        ds.validate();
    } catch (const Error& e) {
        throw IoError(std::string("invalid dataset: ") + e.what());
    }
    return ds;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) { write_text(path, dataset_to_csv(ds)); }

Dataset read_dataset(const std::filesystem::path& path) { return dataset_from_csv(read_text(path)); }

std::string history_to_csv(std::span<const training::HistoryEntry> history) {
    std::ostringstream os;
    os << "epoch,loss,lr\n" << std::setprecision(17);
    for (const auto& e : history) os << e.epoch << ',' << e.loss << ',' << e.lr << "\n";
    return os.str();
}

}  // namespace hamreg::cli
