#pragma once

#include "bccui/error.hpp"
#include "bccui/image.hpp"
#include "bccui/superpixel.hpp"
#include "bccui/roi.hpp"
#include "bccui/features.hpp"
#include "bccui/svm.hpp"
#include "bccui/metrics.hpp"
#include "bccui/phantom.hpp"
#include "bccui/io.hpp"
#include "bccui/pipeline.hpp"
