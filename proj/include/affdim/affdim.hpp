#pragma once

#include "cli.hpp"
#include "dimension.hpp"
#include "enumerate.hpp"
#include "errors.hpp"
#include "gallery.hpp"
#include "ifs.hpp"
#include "io.hpp"
#include "linalg2.hpp"
#include "parallel.hpp"
#include "pressure.hpp"
#include "scaled.hpp"
#include "spectrum.hpp"
#include "subset.hpp"
