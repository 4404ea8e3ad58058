#include "nmqc/csv_io.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace nmqc {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_comment_block(std::ostream& os, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        os << "# " << line << '\n';
    }
}

namespace {

void row(std::ostream& os, std::initializer_list<double> values) {
    bool first = true;
    for (const double v : values) {
        if (!first) {
            os << ',';
        }
        os << format_number(v);
        first = false;
    }
}

}  // namespace

void write_coefficients_csv(std::ostream& os, const CoefficientTable& table, const std::string& header) {
    write_comment_block(os, header);
    os << "t,Delta,gamma,Gamma1,Gamma2\n";
    for (std::size_t i = 0; i < table.size(); ++i) {
        row(os, {table.times()[i], table.delta()[i], table.gamma()[i], table.gamma1()[i], table.gamma2()[i]});
        os << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec, const std::string& header) {
    write_comment_block(os, header);
    os << "# clamp_count: " << rec.clamp_count << '\n';
    os << "t,x,y,z,ux,uy,dW,Y,Lambda\n";
    for (std::size_t k = 0; k < rec.size(); ++k) {
        const auto& s = rec.states[k];
        const auto& u = rec.controls[k];
        row(os, {rec.times[k], s.x, s.y, s.z, u.ux, u.uy, rec.noise[k], rec.record[k], rec.lambda[k]});
        os << '\n';
    }
}

std::string control_summary(const OCResult& res) {
    std::ostringstream os;
    os << "cost=" << format_number(res.cost) << " zero_control_cost=" << format_number(res.zero_control_cost)
       << " iterations=" << res.iterations << " converged=" << (res.converged ? "true" : "false")
       << " tol=" << format_number(res.tol) << " final_change=" << format_number(res.final_change)
       << " theta=" << format_number(res.theta);
    return os.str();
}

void write_control_csv(std::ostream& os, const OCResult& res, const std::string& header) {
    write_comment_block(os, header);
    os << "t,ux,uy,l1,l2,l3,x,y,z\n";
    for (std::size_t k = 0; k < res.control.times.size(); ++k) {
        const auto& u = res.control.u[k];
        const auto& l = res.costate.lambda[k];
        const auto& s = res.state_path[k];
        row(os, {res.control.times[k], u.ux, u.uy, l.l1, l.l2, l.l3, s.x, s.y, s.z});
        os << '\n';
    }
    os << "# summary " << control_summary(res) << '\n';
}

void write_ensemble_csv(std::ostream& os, const EnsembleStats& stats, const std::string& header, int warning_flag) {
    write_comment_block(os, header);
    os << "# trajectories: " << stats.trajectory_count << '\n';
    os << "# clamp_rate: " << format_number(stats.clamp_rate) << '\n';
    os << "t,mean_Lambda,var_Lambda,mean_x,mean_y,mean_z" << (warning_flag >= 0 ? ",warning" : "") << '\n';
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        row(os, {stats.times[i], stats.mean_lambda[i], stats.var_lambda[i], stats.mean_x[i], stats.mean_y[i],
                 stats.mean_z[i]});
        if (warning_flag >= 0) {
            os << ',' << warning_flag;
        }
        os << '\n';
    }
}

std::string ensemble_sidecar_json(const EnsembleStats& stats, const std::string& config_echo) {
    nlohmann::ordered_json j;
    j["config"] = config_echo;
    j["master_seed"] = stats.master_seed;
    j["trajectories"] = stats.trajectory_count;
    j["clamp_rate"] = stats.clamp_rate;
    j["samples"] = stats.times.size();
    return j.dump(2) + "\n";
}

void write_lambda_csv(std::ostream& os, const std::vector<double>& times, const std::vector<double>& lambda,
                      const std::string& header, int warning_flag) {
    write_comment_block(os, header);
    os << "t,Lambda" << (warning_flag >= 0 ? ",warning" : "") << '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
        row(os, {times[i], lambda[i]});
        if (warning_flag >= 0) {
            os << ',' << warning_flag;
        }
        os << '\n';
    }
}

}  // namespace nmqc
