/* Copyright 2026 The vsg Authors
 * Licensed under the Apache License, Version 2.0
 *
 * C ABI for external encoder plugins loaded with dlopen. A plugin exports:
 *
 *   int vsg_backend_get_info(VsgBackendInfo*);
 *   int vsg_backend_encode(const float*, uint32_t, uint32_t,
 *                          float*, uint32_t, uint32_t);
 *   int vsg_backend_transcribe(const float*, uint32_t, uint32_t,
 *                              char*, uint32_t);          (optional)
 *
 * All entry points return 0 on success and nonzero on failure. Matrices are
 * row-major float32.
 */
#ifndef VSG_BACKEND_PLUGIN_H_
#define VSG_BACKEND_PLUGIN_H_

#include <stdint.h>

#define VSG_BACKEND_ABI_VERSION 1u

#ifdef __cplusplus
extern "C" {
#endif

typedef struct VsgBackendInfo {
  uint32_t abi_version;            /* must equal VSG_BACKEND_ABI_VERSION */
  uint32_t n_mels;                 /* expected feature rows */
  uint32_t n_frames;               /* expected feature columns */
  uint32_t out_frames;             /* emitted embedding rows */
  uint32_t out_dim;                /* emitted embedding columns */
  int32_t supports_transcription;  /* nonzero if transcribe is usable */
} VsgBackendInfo;

typedef int (*VsgBackendGetInfoFn)(VsgBackendInfo* info);
typedef int (*VsgBackendEncodeFn)(const float* mel, uint32_t n_mels, uint32_t n_frames,
                                  float* out, uint32_t out_frames, uint32_t out_dim);
/* Writes a NUL-terminated UTF-8 transcript into buf. */
typedef int (*VsgBackendTranscribeFn)(const float* mel, uint32_t n_mels, uint32_t n_frames,
                                      char* buf, uint32_t buf_len);

#ifdef __cplusplus
}
#endif

#endif /* VSG_BACKEND_PLUGIN_H_ */
