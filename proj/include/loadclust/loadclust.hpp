#pragma once

#include "loadclust/ahc.hpp"
#include "loadclust/core.hpp"
#include "loadclust/curves.hpp"
#include "loadclust/distance.hpp"
#include "loadclust/evaluation.hpp"
#include "loadclust/io.hpp"
#include "loadclust/partitional.hpp"
#include "loadclust/random.hpp"
#include "loadclust/result.hpp"
