#include "gridfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gridfuse/errors.hpp"

namespace gridfuse {

namespace {

constexpr double kClamp = 1e-6;

double clampp(double p) { return std::clamp(p, kClamp, 1.0 - kClamp); }

double bernoulli_kld(double q, double p) {
    q = clampp(q);
    p = clampp(p);
    return q * std::log(q / p) + (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
}

double triplet_kld(const MassCell& label, const MassCell& pred) {
    const double q[3] = {clampp(label.m_f), clampp(label.m_o), clampp(label.uncertainty())};
    const double p[3] = {clampp(pred.m_f), clampp(pred.m_o), clampp(pred.uncertainty())};
    double qs = q[0] + q[1] + q[2], ps = p[0] + p[1] + p[2];
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) acc += (q[k] / qs) * std::log((q[k] / qs) / (p[k] / ps));
    return acc;
}

ClassScore score_from_counts(int64_t tp, int64_t fp, int64_t fn) {
    ClassScore s;
    s.support = tp + fn;
    s.precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 1.0;
    s.recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 1.0;
    s.dice = (s.precision + s.recall) > 0.0
                 ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                 : 0.0;
    return s;
}

}  // namespace

double kld_score(const EvidentialGrid& pred, const EvidentialGrid& label, KldMode mode) {
    if (!(pred.geometry() == label.geometry())) throw GeometryMismatch{};
    const size_t n = pred.cells().size();
    double total = 0.0;
    for (size_t k = 0; k < n; ++k) {
        if (mode == KldMode::PignisticBernoulli) {
            total += bernoulli_kld(pignistic_p_occupied(label.cells()[k]),
                                   pignistic_p_occupied(pred.cells()[k]));
        } else {
            total += triplet_kld(label.cells()[k], pred.cells()[k]);
        }
    }
    return total / double(n);
}

ClassScores classification_scores(const EvidentialGrid& pred, const EvidentialGrid& label) {
    if (!(pred.geometry() == label.geometry())) throw GeometryMismatch{};
    int64_t tp_o = 0, fp_o = 0, fn_o = 0, tn_o = 0;
    const size_t n = pred.cells().size();
    for (size_t k = 0; k < n; ++k) {
        const bool pred_occ = pignistic_p_occupied(pred.cells()[k]) > 0.5;
        const bool label_occ = pignistic_p_occupied(label.cells()[k]) > 0.5;
        if (pred_occ && label_occ) ++tp_o;
        else if (pred_occ && !label_occ) ++fp_o;
        else if (!pred_occ && label_occ) ++fn_o;
        else ++tn_o;
    }
    ClassScores s;
    s.occupied = score_from_counts(tp_o, fp_o, fn_o);
    // free is the complement class: its TP are the occupied TN
    s.free = score_from_counts(tn_o, fn_o, fp_o);
    return s;
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw EmptyInput{};
    std::sort(values.begin(), values.end());
    const double n = double(values.size());
    const double pos = std::clamp(p * (n + 1.0), 1.0, n);  // 1-based
    const size_t lo = size_t(std::floor(pos)) - 1;
    const double frac = pos - std::floor(pos);
    if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

std::vector<SummaryRow> aggregate(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw EmptyInput{};
    std::map<std::pair<char, std::string>, std::vector<const EvalRecord*>> groups;
    for (const EvalRecord& r : records) groups[{r.config, r.method}].push_back(&r);

    std::vector<SummaryRow> rows;
    for (const auto& [key, recs] : groups) {
        std::vector<double> klds;
        klds.reserve(recs.size());
        SummaryRow row{};
        row.config = key.first;
        row.method = key.second;
        row.count = int64_t(recs.size());
        for (const EvalRecord* r : recs) {
            klds.push_back(r->kld);
            row.mean_p_occ += r->scores.occupied.precision;
            row.mean_r_occ += r->scores.occupied.recall;
            row.mean_d_occ += r->scores.occupied.dice;
            row.mean_p_free += r->scores.free.precision;
            row.mean_r_free += r->scores.free.recall;
            row.mean_d_free += r->scores.free.dice;
        }
        const double inv = 1.0 / double(recs.size());
        row.mean_p_occ *= inv;
        row.mean_r_occ *= inv;
        row.mean_d_occ *= inv;
        row.mean_p_free *= inv;
        row.mean_r_free *= inv;
        row.mean_d_free *= inv;

        row.kld_q1 = quantile(klds, 0.25);
        row.kld_med = quantile(klds, 0.5);
        row.kld_q3 = quantile(klds, 0.75);
        const double iqr = row.kld_q3 - row.kld_q1;
        const double lo_fence = row.kld_q1 - 1.5 * iqr;
        const double hi_fence = row.kld_q3 + 1.5 * iqr;
        row.kld_lo = std::numeric_limits<double>::infinity();
        row.kld_hi = -std::numeric_limits<double>::infinity();
        for (double v : klds) {
            if (v >= lo_fence) row.kld_lo = std::min(row.kld_lo, v);
            if (v <= hi_fence) row.kld_hi = std::max(row.kld_hi, v);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_eval_csv(const std::vector<EvalRecord>& records, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "sample_id,config,method,kld,p_occ,r_occ,d_occ,p_free,r_free,d_free\n";
    char buf[256];
    for (const EvalRecord& r : records) {
        std::snprintf(buf, sizeof(buf), "%s,%c,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      r.sample_id.c_str(), r.config, r.method.c_str(), r.kld,
                      r.scores.occupied.precision, r.scores.occupied.recall,
                      r.scores.occupied.dice, r.scores.free.precision,
                      r.scores.free.recall, r.scores.free.dice);
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

std::vector<EvalRecord> read_eval_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) throw IoError("empty eval csv: " + path);
    std::vector<EvalRecord> records;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        EvalRecord r;
        std::getline(ss, r.sample_id, ',');
        std::getline(ss, field, ',');
        r.config = field.empty() ? 'A' : field[0];
        std::getline(ss, r.method, ',');
        auto next = [&]() {
            std::getline(ss, field, ',');
            return std::stod(field);
        };
        r.kld = next();
        r.scores.occupied.precision = next();
        r.scores.occupied.recall = next();
        r.scores.occupied.dice = next();
        r.scores.free.precision = next();
        r.scores.free.recall = next();
        r.scores.free.dice = next();
        records.push_back(std::move(r));
    }
    return records;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "config,method,kld_q1,kld_med,kld_q3,kld_lo,kld_hi,"
          "p_occ,r_occ,d_occ,p_free,r_free,d_free,count\n";
    char buf[384];
    for (const SummaryRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%c,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%lld\n",
                      r.config, r.method.c_str(), r.kld_q1, r.kld_med, r.kld_q3, r.kld_lo,
                      r.kld_hi, r.mean_p_occ, r.mean_r_occ, r.mean_d_occ, r.mean_p_free,
                      r.mean_r_free, r.mean_d_free, static_cast<long long>(r.count));
        os << buf;
    }
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace gridfuse
