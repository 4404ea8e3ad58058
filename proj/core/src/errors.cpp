#include "nmqc/errors.hpp"

#include <sstream>

namespace nmqc {

namespace {

std::string resource_message(std::size_t requested, std::size_t available) {
    std::ostringstream os;
    os << "requested " << requested << " samples exceeds the memory budget of " << available << " samples";
    return os.str();
}

std::string integration_message(const std::string& what, double t, double x, double y, double z, double ux,
                                double uy) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at t=" << t << " state=(" << x << ", " << y << ", " << z << ") control=(" << ux << ", " << uy
       << ")";
    return os.str();
}

std::string config_message(const std::string& what, int line, int column) {
    if (line <= 0) {
        return what;
    }
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << what;
    return os.str();
}

}  // namespace

ResourceError::ResourceError(std::size_t requested, std::size_t available)
    : std::runtime_error(resource_message(requested, available)), requested_(requested), available_(available) {}

IntegrationError::IntegrationError(const std::string& what, double t_, double x_, double y_, double z_, double ux_,
                                   double uy_)
    : std::runtime_error(integration_message(what, t_, x_, y_, z_, ux_, uy_)),
      t(t_), x(x_), y(y_), z(z_), ux(ux_), uy(uy_) {}

ConfigError::ConfigError(const std::string& what, int line, int column)
    : std::runtime_error(config_message(what, line, column)), line_(line), column_(column) {}

}  // namespace nmqc
