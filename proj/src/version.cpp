#include "longmem/version.hpp"

#include <Eigen/Core>
#include <fftw3.h>

namespace longmem {

VersionInfo version_info() {
    return {LONGMEM_VERSION,
            std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                std::to_string(EIGEN_MINOR_VERSION),
            fftw_version};
}

}  // namespace longmem
