// Payload shapes of the JSON API. Field names mirror the CSV columns where a
// column counterpart exists.
export {};
