#pragma once

#include <string>

namespace longmem {

/// Versions of the library and of the numerical backends it was built with.
struct VersionInfo {
    std::string longmem;
    std::string eigen;
    std::string fftw;
};

VersionInfo version_info();

}  // namespace longmem
