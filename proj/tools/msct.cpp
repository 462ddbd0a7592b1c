// msct: batch front end over the header library.
//
//   msct phantom      -> volume.msv + truth.msl
//   msct project      volume.msv -> sinogram.mss
//   msct reconstruct  sinogram.mss -> volume.msv
//   msct bin          volume.msv -> volume.msv + plan.json
//   msct segment      volume.msv -> labels.msl + report.json
//   msct eval         pred.msl truth.msl [volume.msv] -> metrics.json + metrics.csv
//   msct sweep        volume.msv [truth.msl] -> ranked results.csv
//   msct preview      volume.msv -> composite.ppm
//   msct rerun        x.config.json   (replays a recorded invocation)
//
// Every command writes <output stem>.config.json holding all option values
// (defaults included) so a run can be replayed exactly.
//
// Exit codes: 0 ok, 2 usage/validation, 3 I/O, 4 internal.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "msct/msct.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace msct;

namespace {

// ------------------------------------------------------------------ helpers

std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty())
            out.push_back(item);
    return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& what) {
    std::istringstream in(s);
    T v{};
    in >> v;
    if (in.fail() || !in.eof())
        throw ValidationError("cannot parse " + what + " value '" + s + "'");
    return v;
}

template <class T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
    std::vector<T> out;
    for (const auto& item : split(s))
        out.push_back(parse_number<T>(item, what));
    return out;
}

fs::path sibling(const fs::path& out, const std::string& suffix) {
    auto p = out;
    p.replace_extension();
    return p.string() + suffix;
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream f(path);
    if (!f)
        throw IoError("cannot write " + path.string());
    f << j.dump(2) << "\n";
    if (!f)
        throw IoError("write failed for " + path.string());
}

void write_text(const std::string& text, const fs::path& path) {
    std::ofstream f(path);
    if (!f)
        throw IoError("cannot write " + path.string());
    f << text;
    if (!f)
        throw IoError("write failed for " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

// Every option of a subcommand after parsing: given values as typed, or the
// default. Flags record true/false.
json resolved_options(const CLI::App* sub) {
    json j = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt == sub->get_help_ptr() || opt->get_lnames().empty())
            continue;
        const std::string key = opt->get_lnames().front();
        if (opt->get_type_size() == 0) {
            j[key] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto& r = opt->results();
            j[key] = r.size() == 1 ? json(r.front()) : json(r);
        } else if (!opt->get_default_str().empty()) {
            j[key] = opt->get_default_str();
        }
    }
    return j;
}

void write_config(const CLI::App* sub, const fs::path& out, json resolved) {
    json j;
    j["command"] = sub->get_name();
    j["options"] = resolved_options(sub);
    j["resolved"] = std::move(resolved);
    write_json(j, sibling(out, ".config.json"));
}

// Turns a recorded config back into argv tokens.
std::vector<std::string> replay_args(const json& config) {
    std::vector<std::string> args{"msct", config.at("command").get<std::string>()};
    for (const auto& [key, value] : config.at("options").items()) {
        if (value.is_boolean()) {
            if (value.get<bool>())
                args.push_back("--" + key);
            continue;
        }
        args.push_back("--" + key);
        if (value.is_array())
            for (const auto& v : value)
                args.push_back(v.get<std::string>());
        else
            args.push_back(value.get<std::string>());
    }
    return args;
}

struct Common {
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for noise and hashing")->capture_default_str();
}

// ----------------------------------------------------------------- phantom

struct PhantomArgs {
    std::string output;
    std::string truth;
    std::string preset = "four";
    std::uint32_t size = 100;
    std::string spec;
    std::string energies = "20,160,128";
    float voxel_mm = 1.0f;
    Common common;
};

EnergyAxis parse_energies(const std::string& s) {
    const auto parts = split(s);
    if (parts.size() != 3)
        throw ValidationError("--energies expects lo,hi,count");
    const auto count = parse_number<std::size_t>(parts[2], "energy count");
    if (count == 0)
        throw ValidationError("--energies count must be positive");
    return EnergyAxis::linear(parse_number<float>(parts[0], "energy"), parse_number<float>(parts[1], "energy"), count);
}

void run_phantom(const CLI::App* sub, const PhantomArgs& a) {
    PhantomSpec spec;
    if (!a.spec.empty())
        spec = PhantomSpec::from_json(read_json(a.spec));
    else if (a.preset == "four")
        spec = phantoms::four_materials(a.size);
    else if (a.preset == "container")
        spec = phantoms::container(a.size);
    else
        throw ValidationError("unknown preset '" + a.preset + "' (four, container)");
    if (a.spec.empty())
        spec.voxel_size = {a.voxel_mm, a.voxel_mm, a.voxel_mm};
    const auto [v, truth] = generate_phantom(spec, parse_energies(a.energies));
    const fs::path out = a.output;
    const fs::path truth_path = a.truth.empty() ? sibling(out, ".truth.msl") : fs::path(a.truth);
    save_volume(v, out);
    save_labels(truth, truth_path);
    write_config(sub, out, {{"phantom", spec.to_json()}, {"truth", truth_path.string()}, {"digest", volume_digest(v)}});
}

// ----------------------------------------------------------------- project

struct ProjectArgs {
    std::string input, output;
    std::uint32_t angles = 180;
    std::uint32_t detectors = 256;
    double noise = 0.0;
    Common common;
};

void run_project(const CLI::App* sub, const ProjectArgs& a) {
    const auto v = load_volume(a.input);
    Sinogram s = forward_project(v, a.angles, a.detectors);
    if (a.noise > 0.0)
        s = add_poisson_noise(s, a.noise, a.common.seed);
    save_sinogram(s, a.output);
    write_config(sub, a.output,
                 {{"angles", a.angles},
                  {"detectors", a.detectors},
                  {"incident_photons", a.noise > 0.0 ? json(a.noise) : json()},
                  {"seed", a.common.seed},
                  {"source_digest", volume_digest(v)}});
}

// ------------------------------------------------------------- reconstruct

struct ReconArgs {
    std::string input, output;
    std::uint32_t nx = 0, ny = 0;
    ReconSettings cfg;
    float voxel_mm = 1.0f;
    Common common;
};

void run_reconstruct(const CLI::App* sub, ReconArgs a) {
    const auto s = load_sinogram(a.input);
    a.cfg.voxel_size = {a.voxel_mm, a.voxel_mm, a.voxel_mm};
    a.cfg.threads = resolve_threads(a.common.threads);
    const auto v = art_tv_reconstruct(s, a.nx, a.ny, a.cfg);
    save_volume(v, a.output);
    write_config(sub, a.output,
                 {{"nx", a.nx},
                  {"ny", a.ny},
                  {"iters", a.cfg.iters},
                  {"tv_weight", a.cfg.tv_weight},
                  {"tv_steps", a.cfg.tv_steps},
                  {"relaxation", a.cfg.relaxation},
                  {"voxel_size_mm", a.voxel_mm},
                  {"digest", volume_digest(v)}});
}

// --------------------------------------------------------------------- bin

struct BinArgs {
    std::string input, output;
    std::string mode = "adaptive";
    std::size_t bins = 10;
    std::string clip;
    Common common;
};

void run_bin(const CLI::App* sub, const BinArgs& a) {
    SpectralVolume v = load_volume(a.input);
    json resolved{{"mode", a.mode}, {"bins", a.bins}};
    if (!a.clip.empty()) {
        const auto c = parse_list<float>(a.clip, "clip");
        if (c.size() != 2)
            throw ValidationError("--clip expects lo,hi in keV");
        v = clip_spectrum(v, c[0], c[1]);
        resolved["clip_kev"] = c;
    }
    if (a.bins == 0)
        throw ValidationError("--bins must be positive");
    BinningPlan plan;
    SpectralVolume out;
    if (a.mode == "uniform") {
        out = uniform_rebin(v, a.bins);
        plan.groups = uniform_groups(v.channels(), a.bins);
        plan.channel_variance = channel_variance(v);
        for (auto [lo, hi] : plan.groups) {
            double s = 0;
            for (auto e = lo; e <= hi; ++e)
                s += plan.channel_variance[e];
            plan.per_group_variance.push_back(s);
        }
    } else if (a.mode == "adaptive") {
        std::tie(out, plan) = adaptive_rebin(v, a.bins);
        resolved["budget_slack"] = kBudgetSlack;
    } else {
        throw ValidationError("unknown binning mode '" + a.mode + "' (uniform, adaptive)");
    }
    save_volume(out, a.output);
    json pj = plan.to_json();
    pj["centers_kev"] = out.energy().centers();
    write_json(pj, sibling(a.output, ".plan.json"));
    resolved["output_channels"] = out.channels();
    write_config(sub, a.output, resolved);
}

// ----------------------------------------------------------------- segment

struct SegmentArgs {
    std::string input, output;
    std::string algo = "gc";
    std::string k; // algorithm dependent default
    std::uint32_t min_size = 625;
    std::string nbr = "n27";
    double sigma = 1.0;
    std::uint32_t cuts = 24, tables = 35, quant_bits = 16, max_iters = 100;
    double epsilon = 1.0;
    double merge_radius = 0.0;
    std::string search = "auto";
    bool no_gradient = false;
    Common common;
};

NeighborSearch parse_search(const std::string& s) {
    if (s == "auto")
        return NeighborSearch::Auto;
    if (s == "exact")
        return NeighborSearch::Exact;
    if (s == "lsh")
        return NeighborSearch::Lsh;
    throw ValidationError("unknown neighbor search '" + s + "' (auto, exact, lsh)");
}

GraphCutParams gc_params(const SegmentArgs& a, double k) {
    GraphCutParams p;
    p.k = k;
    p.min_size = a.min_size;
    p.neighborhood = Neighborhood::parse(a.nbr, a.sigma);
    p.validate();
    return p;
}

FamsParams fams_params(const SegmentArgs& a, double k) {
    if (k < 1.0 || k != std::floor(k))
        throw ValidationError("FAMS -k must be a positive integer");
    FamsParams p;
    p.k_neigh = std::uint32_t(k);
    p.hash_cuts = a.cuts;
    p.hash_tables = a.tables;
    p.quant_bits = a.quant_bits;
    p.max_iters = a.max_iters;
    p.epsilon = a.epsilon;
    if (a.merge_radius > 0.0)
        p.mode_merge_radius = a.merge_radius;
    p.search = parse_search(a.search);
    p.seed = a.common.seed;
    p.threads = resolve_threads(a.common.threads);
    p.validate();
    return p;
}

Segmentation segment_with(const SpectralVolume& v, const SegmentArgs& a, double k) {
    const Algorithm algo = algorithm_from_string(a.algo);
    if (algo == Algorithm::GraphCut)
        return segment_fh(v, gc_params(a, k));
    return segment_fams(v, fams_params(a, k), !a.no_gradient);
}

double default_k(const std::string& algo) { return algorithm_from_string(algo) == Algorithm::GraphCut ? 3.0 : 220.0; }

void run_segment(const CLI::App* sub, const SegmentArgs& a) {
    const auto v = load_volume(a.input);
    const double k = a.k.empty() ? default_k(a.algo) : parse_number<double>(a.k, "k");
    const auto seg = segment_with(v, a, k);
    save_labels(seg.labels, a.output);
    json report = seg.provenance();
    report["homogeneity_score"] = homogeneity_score(v, seg.labels);
    write_json(report, sibling(a.output, ".report.json"));
    write_config(sub, a.output, seg.params);
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::string pred, truth, volume, output, csv;
    bool keep_background = false;
    std::size_t channel = 0;
    Common common;
};

MetricsReport evaluate(const LabelVolume& pred, const LabelVolume& truth, bool keep_background) {
    return dice_multilabel(keep_background ? pred : suppress_background(pred, truth), truth);
}

void run_eval(const CLI::App* sub, const EvalArgs& a) {
    const auto pred = load_labels(a.pred);
    const auto truth = load_labels(a.truth);
    MetricsReport r = evaluate(pred, truth, a.keep_background);
    if (!a.volume.empty()) {
        const auto v = load_volume(a.volume);
        if (!(v.dims() == truth.dims()))
            throw ValidationError("volume and labels differ in size");
        r.homogeneity_score = homogeneity_score(v, pred);
        const auto background = label_mask(truth, 0);
        std::vector<std::uint8_t> foreground(background.size());
        for (std::size_t i = 0; i < foreground.size(); ++i)
            foreground[i] = !background[i];
        if (std::find(foreground.begin(), foreground.end(), 1) != foreground.end())
            r.snr = snr_reconstruction(v, a.channel, foreground);
        for (std::uint32_t l = 1; l <= truth.max_label(); ++l) {
            const auto m = label_mask(truth, l);
            if (std::find(m.begin(), m.end(), 1) != m.end() &&
                std::find(background.begin(), background.end(), 1) != background.end())
                r.cnr[l] = cnr(v, a.channel, m, background);
        }
    }
    const fs::path out = a.output;
    json j = r.to_json();
    j["background_suppressed"] = !a.keep_background;
    write_json(j, out);
    write_text(r.to_csv(), a.csv.empty() ? sibling(out, ".csv") : fs::path(a.csv));
    write_config(sub, out, {{"background_suppressed", !a.keep_background}, {"channel", a.channel}});
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
    SegmentArgs seg;
    std::string truth;
    std::string k_grid, min_size_grid, nbr_grid, cuts_grid, tables_grid;
};

struct SweepRow {
    SegmentArgs args;
    double k;
    std::size_t segments;
    std::optional<double> dice;
    double homogeneity;
};

template <class T>
std::vector<T> grid_axis(const std::string& spec, bool given, T fallback, const std::string& what) {
    if (!given)
        return {fallback};
    auto v = parse_list<T>(spec, what);
    if (v.empty())
        throw ValidationError("empty " + what + " grid");
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void run_sweep(const CLI::App* sub, const SweepArgs& a) {
    const auto v = load_volume(a.seg.input);
    std::optional<LabelVolume> truth;
    if (!a.truth.empty())
        truth = load_labels(a.truth);
    const bool gc = algorithm_from_string(a.seg.algo) == Algorithm::GraphCut;
    const auto ks = grid_axis<double>(a.k_grid, sub->count("--k") > 0, default_k(a.seg.algo), "k");
    std::vector<std::uint32_t> sizes{a.seg.min_size}, cuts{a.seg.cuts}, tables{a.seg.tables};
    std::vector<std::string> nbrs{a.seg.nbr};
    if (gc) {
        sizes = grid_axis<std::uint32_t>(a.min_size_grid, sub->count("--min-size") > 0, a.seg.min_size, "min-size");
        if (sub->count("--nbr") > 0) {
            nbrs = split(a.nbr_grid);
            std::sort(nbrs.begin(), nbrs.end());
            nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
        }
    } else {
        cuts = grid_axis<std::uint32_t>(a.cuts_grid, sub->count("--cuts") > 0, a.seg.cuts, "K");
        tables = grid_axis<std::uint32_t>(a.tables_grid, sub->count("--tables") > 0, a.seg.tables, "L");
    }
    if (nbrs.empty())
        throw ValidationError("empty neighborhood grid");

    std::vector<SweepRow> rows;
    for (double k : ks)
        for (auto ms : sizes)
            for (const auto& nb : nbrs)
                for (auto K : cuts)
                    for (auto L : tables) {
                        SweepRow row{a.seg, k, 0, std::nullopt, 0.0};
                        row.args.min_size = ms;
                        row.args.nbr = nb;
                        row.args.cuts = K;
                        row.args.tables = L;
                        const auto seg = segment_with(v, row.args, k);
                        row.segments = count_segments(seg.labels);
                        row.homogeneity = homogeneity_score(v, seg.labels);
                        if (truth)
                            row.dice = evaluate(seg.labels, *truth, false).overall_dice;
                        rows.push_back(std::move(row));
                    }
    // Grid order is canonical (sorted axes), so a stable sort by score
    // gives the same ranking however the grid was written.
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& l, const SweepRow& r) {
        if (l.dice && r.dice && *l.dice != *r.dice)
            return *l.dice > *r.dice;
        return l.homogeneity < r.homogeneity;
    });

    std::ostringstream csv;
    csv.precision(10);
    csv << "rank,algo," << (gc ? "k,min_size,nbr" : "k,K,L") << ",segments,dice,homogeneity\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv << i + 1 << ',' << (gc ? "gc" : "fams") << ',' << r.k << ',';
        if (gc)
            csv << r.args.min_size << ',' << r.args.nbr;
        else
            csv << r.args.cuts << ',' << r.args.tables;
        csv << ',' << r.segments << ',';
        if (r.dice)
            csv << *r.dice;
        csv << ',' << r.homogeneity << '\n';
    }
    write_text(csv.str(), a.seg.output);
    write_config(sub, a.seg.output,
                 {{"combinations", rows.size()}, {"ranked_by", truth ? "overall_dice" : "homogeneity_score"}});
}

// ----------------------------------------------------------------- preview

struct PreviewArgs {
    std::string input, output;
    std::string channels;
    std::uint32_t slice = 0;
    Common common;
};

void run_preview(const CLI::App* sub, const PreviewArgs& a) {
    const auto v = load_volume(a.input);
    std::array<std::size_t, 3> ch{0, v.channels() / 2, v.channels() - 1};
    if (!a.channels.empty()) {
        const auto c = parse_list<std::size_t>(a.channels, "channel");
        if (c.size() != 3)
            throw ValidationError("--channels expects three indices r,g,b");
        ch = {c[0], c[1], c[2]};
    }
    save_ppm(rgb_composite(v, ch, a.slice), a.output);
    write_config(sub, a.output,
                 {{"channels", ch}, {"centers_kev", {v.energy()[ch[0]], v.energy()[ch[1]], v.energy()[ch[2]]}}});
}

// -------------------------------------------------------------------- main

int run(int argc, const char* const* argv);

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const TruncationError*>(&e))
        return 3;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const BoundsError*>(&e))
        return 2;
    return 4;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Multi-spectral CT segmentation tools"};
    app.require_subcommand(1);

    PhantomArgs ph;
    auto* phantom = app.add_subcommand("phantom", "Rasterize a synthetic phantom");
    phantom->add_option("-o,--output", ph.output, "Output volume (.msv)")->required();
    phantom->add_option("--truth", ph.truth, "Truth labels (.msl), default <output>.truth.msl");
    phantom->add_option("--preset", ph.preset, "four or container")->capture_default_str();
    phantom->add_option("--size", ph.size, "Grid edge length for presets")->capture_default_str()->check(
        CLI::PositiveNumber);
    phantom->add_option("--spec", ph.spec, "Phantom description (JSON) instead of a preset");
    phantom->add_option("--energies", ph.energies, "lo,hi,count in keV")->capture_default_str();
    phantom->add_option("--voxel-size", ph.voxel_mm, "Voxel edge in mm (presets)")->capture_default_str();
    add_common(phantom, ph.common);

    ProjectArgs pr;
    auto* project = app.add_subcommand("project", "Parallel-beam projection of a single slice");
    project->add_option("input,--input", pr.input, "Volume (.msv), nz == 1")->required();
    project->add_option("-o,--output", pr.output, "Sinogram (.mss)")->required();
    project->add_option("--angles", pr.angles, "Projection angles over 180 degrees")->capture_default_str();
    project->add_option("--detectors", pr.detectors, "Detector bins")->capture_default_str();
    project->add_option("--noise", pr.noise, "Incident photons per ray for Poisson noise (0 = off)")
        ->capture_default_str();
    add_common(project, pr.common);

    ReconArgs rc;
    auto* recon = app.add_subcommand("reconstruct", "ART-TV reconstruction per channel");
    recon->add_option("input,--input", rc.input, "Sinogram (.mss)")->required();
    recon->add_option("-o,--output", rc.output, "Volume (.msv)")->required();
    recon->add_option("--nx", rc.nx, "Grid width")->required();
    recon->add_option("--ny", rc.ny, "Grid height")->required();
    recon->add_option("--iters", rc.cfg.iters, "Outer iterations")->capture_default_str();
    recon->add_option("--tv-weight", rc.cfg.tv_weight, "TV descent step (1/cm)")->capture_default_str();
    recon->add_option("--tv-steps", rc.cfg.tv_steps, "TV steps per iteration")->capture_default_str();
    recon->add_option("--relaxation", rc.cfg.relaxation, "Kaczmarz relaxation")->capture_default_str();
    recon->add_option("--voxel-size", rc.voxel_mm, "Pixel edge in mm")->capture_default_str();
    add_common(recon, rc.common);

    BinArgs bn;
    auto* bin = app.add_subcommand("bin", "Energy rebinning");
    bin->add_option("input,--input", bn.input, "Volume (.msv)")->required();
    bin->add_option("-o,--output", bn.output, "Rebinned volume (.msv)")->required();
    bin->add_option("--mode", bn.mode, "uniform or adaptive")->capture_default_str();
    bin->add_option("--bins", bn.bins, "Output bins")->capture_default_str();
    bin->add_option("--clip", bn.clip, "lo,hi keV window applied before binning");
    add_common(bin, bn.common);

    SegmentArgs sg;
    auto add_segment_options = [](CLI::App* sub, SegmentArgs& s, bool grid) {
        sub->add_option("input,--input", s.input, "Volume (.msv)")->required();
        sub->add_option("--algo", s.algo, "gc or fams")->capture_default_str();
        if (!grid) {
            sub->add_option("-k,--k", s.k, "gc: scale k (default 3.0); fams: pilot neighbors (default 220)");
            sub->add_option("--min-size", s.min_size, "gc: smallest segment")->capture_default_str();
            sub->add_option("--nbr", s.nbr, "gc: n7, n27 or n27w")->capture_default_str();
            sub->add_option("-K,--cuts", s.cuts, "fams: cuts per hash table")->capture_default_str();
            sub->add_option("-L,--tables", s.tables, "fams: hash tables")->capture_default_str();
        }
        sub->add_option("--sigma", s.sigma, "gc: falloff for n27w")->capture_default_str();
        sub->add_option("--quant-bits", s.quant_bits, "fams: lattice bits")->capture_default_str();
        sub->add_option("--max-iters", s.max_iters, "fams: mean-shift iterations")->capture_default_str();
        sub->add_option("--epsilon", s.epsilon, "fams: convergence step (lattice units)")->capture_default_str();
        sub->add_option("--merge-radius", s.merge_radius, "fams: mode merge radius (0 = 1% of range per dim)")
            ->capture_default_str();
        sub->add_option("--search", s.search, "fams: auto, exact or lsh")->capture_default_str();
        sub->add_flag("--no-gradient", s.no_gradient, "fams: cluster raw spectra, not spectral gradients");
    };
    auto* segment = app.add_subcommand("segment", "Segment a volume");
    add_segment_options(segment, sg, false);
    segment->add_option("-o,--output", sg.output, "Labels (.msl)")->required();
    add_common(segment, sg.common);

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Dice and image-quality metrics");
    eval->add_option("pred,--pred", ev.pred, "Predicted labels (.msl)")->required();
    eval->add_option("truth,--truth", ev.truth, "Truth labels (.msl)")->required();
    eval->add_option("volume,--volume", ev.volume, "Volume for homogeneity, SNR and CNR");
    eval->add_option("-o,--output", ev.output, "Metrics JSON")->required();
    eval->add_option("--csv", ev.csv, "Metrics CSV, default <output>.csv");
    eval->add_flag("--keep-background", ev.keep_background,
                   "Score predicted segments that mostly cover truth background");
    eval->add_option("--channel", ev.channel, "Channel for SNR/CNR")->capture_default_str();
    add_common(eval, ev.common);

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "Deterministic parameter grid search");
    add_segment_options(sweep, sw.seg, true);
    sweep->add_option("--truth", sw.truth, "Truth labels; rank by dice instead of homogeneity");
    sweep->add_option("-o,--output", sw.seg.output, "Ranked results (.csv)")->required();
    sweep->add_option("-k,--k", sw.k_grid, "Comma-separated k values");
    sweep->add_option("--min-size", sw.min_size_grid, "gc: comma-separated min sizes");
    sweep->add_option("--nbr", sw.nbr_grid, "gc: comma-separated neighborhoods");
    sweep->add_option("-K,--cuts", sw.cuts_grid, "fams: comma-separated K values");
    sweep->add_option("-L,--tables", sw.tables_grid, "fams: comma-separated L values");
    add_common(sweep, sw.seg.common);

    PreviewArgs pv;
    auto* preview = app.add_subcommand("preview", "False-colour composite of three channels");
    preview->add_option("input,--input", pv.input, "Volume (.msv)")->required();
    preview->add_option("-o,--output", pv.output, "Image (.ppm)")->required();
    preview->add_option("--channels", pv.channels, "r,g,b channel indices (default first, middle, last)");
    preview->add_option("--slice", pv.slice, "z index")->capture_default_str();
    add_common(preview, pv.common);

    std::string replay;
    auto* rerun = app.add_subcommand("rerun", "Replay a recorded <output>.config.json");
    rerun->add_option("config", replay, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc_parse = app.exit(e);
        return rc_parse == 0 ? 0 : 2;
    }

    if (*rerun) {
        const auto args = replay_args(read_json(replay));
        std::vector<const char*> ptrs;
        for (const auto& s : args)
            ptrs.push_back(s.c_str());
        return run(int(ptrs.size()), ptrs.data());
    }
    if (*phantom)
        run_phantom(phantom, ph);
    else if (*project)
        run_project(project, pr);
    else if (*recon)
        run_reconstruct(recon, rc);
    else if (*bin)
        run_bin(bin, bn);
    else if (*segment)
        run_segment(segment, sg);
    else if (*eval)
        run_eval(eval, ev);
    else if (*sweep)
        run_sweep(sweep, sw);
    else if (*preview)
        run_preview(preview, pv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "msct: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
